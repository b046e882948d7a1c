#include "lmplan/report.hpp"

#include <cmath>
#include <cstdio>

namespace lmplan {

using nlohmann::json;

namespace {

json vec_json(const Eigen::Ref<const VecX>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec3 vec3_of(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mask_json(const AxisMask& m) { return json::array({m[0], m[1], m[2]}); }

AxisMask mask_of(const json& j) { return {j.at(0).get<bool>(), j.at(1).get<bool>(), j.at(2).get<bool>()}; }

json spline_json(const Spline3& s) {
  return {{"t0", s.domain.t0}, {"tf", s.domain.tf}, {"x", vec_json(s.x)}, {"y", vec_json(s.y)}, {"z", vec_json(s.z)}};
}

Spline3 spline_of(const json& j) {
  Spline3 s;
  s.domain = {j.at("t0").get<double>(), j.at("tf").get<double>()};
  for (int k = 0; k < 6; ++k) {
    s.x(k) = j.at("x").at(static_cast<std::size_t>(k)).get<double>();
    s.y(k) = j.at("y").at(static_cast<std::size_t>(k)).get<double>();
    s.z(k) = j.at("z").at(static_cast<std::size_t>(k)).get<double>();
  }
  return s;
}

json times_json(const SolveTimeStats& s) {
  return {{"count", s.count}, {"median_ms", s.median_ms}, {"mean_ms", s.mean_ms}, {"p90_ms", s.p90_ms},
          {"max_ms", s.max_ms}};
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TickRecord>& log) {
  out << kTrajectoryHeader << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
  };
  for (const auto& r : log) {
    const double row[] = {r.t,      r.r.x(), r.r.y(), r.r.z(), r.v.x(),  r.v.y(),  r.v.z(),  r.a.x(), r.a.y(),
                          r.a.z(),  r.f.x(), r.f.y(), r.f.z(), r.zmp.x(), r.zmp.y(), r.margin, r.solve_ms};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) out << ',';
      num(row[i]);
    }
    out << "\n";
  }
}

json metrics_json(const Scenario& sc, const ScenarioMetrics& m, const std::string& digest) {
  json d = json::array();
  for (const auto& r : m.disturbance_response) {
    d.push_back({{"t_start", r.disturbance.t_start},
                 {"duration", r.disturbance.duration},
                 {"force", vec_json(r.disturbance.force)},
                 {"mean_planned_force", vec_json(r.mean_planned_force)},
                 {"samples", r.samples},
                 {"settled_planned_force", vec_json(r.settled_planned_force)},
                 {"settled_samples", r.settled_samples}});
  }
  return {{"scenario", sc.name},
          {"mode", to_string(sc.task.mode)},
          {"seed", sc.sim.seed},
          {"config_digest", digest},
          {"min_zmp_margin", m.min_zmp_margin},
          {"zmp_exit", m.zmp_exit},
          {"first_exit_time", m.first_exit_time},
          {"friction_violations", m.friction_violations},
          {"tracking_rms", m.tracking_rms},
          {"displacement", vec_json(m.displacement)},
          {"plans", m.plans},
          {"optimal_plans", m.optimal_plans},
          {"stale_plans", m.stale_plans},
          {"rejected_plans", m.rejected_plans},
          {"solve_time", times_json(m.solve)},
          {"warm_solve_time", times_json(m.warm_solve)},
          {"horizon", m.horizon},
          {"horizon_to_solve", m.horizon_to_solve},
          {"failed", m.failed},
          {"failure", m.failure},
          {"counter_force", d}};
}

json plan_to_json(const Plan& p) {
  json motion = json::array(), force = json::array(), masks = json::array();
  for (const auto& s : p.motion.pieces()) motion.push_back(spline_json(s));
  for (const auto& s : p.force.pieces()) force.push_back(spline_json(s));
  for (const auto& m : p.force_free) masks.push_back(mask_json(m));
  json feet = json::array();
  for (const auto& f : p.created_from.feet) feet.push_back(vec_json(f));
  json rot = json::array();
  for (int r = 0; r < 3; ++r) rot.push_back(vec_json(p.created_from.rotation.row(r).transpose()));
  return {{"t_created", p.t_created},
          {"horizon", p.horizon},
          {"mode", to_string(p.mode)},
          {"stale", p.stale},
          {"state",
           {{"r", vec_json(p.created_from.r)},
            {"v", vec_json(p.created_from.v)},
            {"a", vec_json(p.created_from.a)},
            {"f", vec_json(p.created_from.f_manip)},
            {"rotation", rot},
            {"feet", feet},
            {"gait_phase", p.created_from.gait_phase}}},
          {"motion", motion},
          {"force", force},
          {"force_free", masks},
          {"stats",
           {{"status", to_string(p.stats.status)},
            {"iterations", p.stats.iterations},
            {"qp_iterations", p.stats.qp_iterations},
            {"kkt_residual", p.stats.kkt_residual},
            {"solve_ms", p.stats.solve_ms},
            {"warm_started", p.stats.warm_started}}}};
}

Plan plan_from_json(const json& j) {
  Plan p;
  p.t_created = j.at("t_created").get<double>();
  p.horizon = j.at("horizon").get<double>();
  p.mode = parse_mode(j.at("mode").get<std::string>());
  p.stale = j.value("stale", false);
  const json& st = j.at("state");
  p.created_from.r = vec3_of(st.at("r"));
  p.created_from.v = vec3_of(st.at("v"));
  p.created_from.a = vec3_of(st.at("a"));
  p.created_from.f_manip = vec3_of(st.at("f"));
  for (int r = 0; r < 3; ++r) p.created_from.rotation.row(r) = vec3_of(st.at("rotation").at(static_cast<std::size_t>(r))).transpose();
  for (std::size_t i = 0; i < 4; ++i) p.created_from.feet[i] = vec3_of(st.at("feet").at(i));
  p.created_from.gait_phase = st.at("gait_phase").get<double>();
  std::vector<Spline3> motion, force;
  for (const auto& s : j.at("motion")) motion.push_back(spline_of(s));
  for (const auto& s : j.at("force")) force.push_back(spline_of(s));
  p.motion = PiecewiseTrajectory(std::move(motion));
  p.force = PiecewiseTrajectory(std::move(force));
  for (const auto& m : j.at("force_free")) p.force_free.push_back(mask_of(m));
  return p;
}

}  // namespace lmplan
