#include "lmplan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lmplan {

std::vector<Disturbance> draw_disturbances(const RandomDisturbances& spec, std::uint64_t seed) {
  if (spec.count < 0 || !(spec.duration > 0) || spec.min_force > spec.max_force) {
    throw std::invalid_argument("invalid random disturbance settings");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> magnitude(spec.min_force, spec.max_force);
  std::vector<Disturbance> out;
  for (int k = 0; k < spec.count; ++k) {
    const double th = angle(rng);
    const double mag = magnitude(rng);
    out.push_back({spec.first + k * spec.period, spec.duration, Vec3(mag * std::cos(th), mag * std::sin(th), 0.0)});
  }
  return out;
}

Vec3 Environment::disturbance_at(double t) const {
  Vec3 d = Vec3::Zero();
  for (const auto& x : disturbances) {
    if (x.active(t)) d += x.force;
  }
  return d;
}

SimForces sim_forces(const SimState& s, const Plan& plan, const Environment& env, const RobotParams& robot,
                     const ManipContact& contact, double t, const Vec3& r, const Vec3& v) {
  const double tau = t - plan.t_created;
  if (tau > plan.horizon + 1e-9) throw HorizonExhausted("plan horizon exhausted; replan required");
  SimForces out;
  out.planned = sample_plan(plan, std::min(tau, plan.horizon));
  out.f_planned = out.planned.f;
  out.f_actual = out.f_planned;
  const Vec3 ee = r + robot.rotation * contact.r_cm;
  for (int k = 0; k < 3; ++k) {
    if (env.spring_axes[static_cast<std::size_t>(k)]) {
      out.f_actual(k) += -env.stiffness(k) * (ee(k) - s.anchor(k)) - env.damping(k) * v(k);
    }
  }
  if (env.payload_onset && t >= *env.payload_onset) {
    for (int k = 0; k < 3; ++k) {
      if (env.payload_axes[static_cast<std::size_t>(k)]) out.f_actual(k) = env.payload_force(k);
    }
  }
  out.disturbance = env.disturbance_at(t);
  out.accel = out.planned.a + (out.disturbance + out.f_actual - out.f_planned) / robot.mass;
  return out;
}

SimState step(const SimState& s, const Plan& plan, double dt, const Environment& env, const RobotParams& robot,
              const ManipContact& contact) {
  if (!(dt > 0)) throw std::invalid_argument("step size must be positive");
  auto acc = [&](double t, const Vec3& r, const Vec3& v) {
    return sim_forces(s, plan, env, robot, contact, t, r, v).accel;
  };
  const double t = s.t;
  const Vec3 k1r = s.v;
  const Vec3 k1v = acc(t, s.r, s.v);
  const Vec3 k2r = s.v + 0.5 * dt * k1v;
  const Vec3 k2v = acc(t + 0.5 * dt, s.r + 0.5 * dt * k1r, k2r);
  const Vec3 k3r = s.v + 0.5 * dt * k2v;
  const Vec3 k3v = acc(t + 0.5 * dt, s.r + 0.5 * dt * k2r, k3r);
  const Vec3 k4r = s.v + dt * k3v;
  const Vec3 k4v = acc(t + dt, s.r + dt * k3r, k4r);

  SimState out = s;
  out.r = s.r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
  out.v = s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  out.t = t + dt;
  const SimForces end = sim_forces(out, plan, env, robot, contact, out.t, out.r, out.v);
  out.a = end.accel;
  out.f_actual = end.f_actual;
  out.external = end.disturbance;
  return out;
}

Vec3 measured_zmp(const Vec3& r, const Vec3& a, const Vec3& f, const Vec3& d, const Vec3& r_cm,
                  const RobotParams& robot) {
  const Vec3 inertial = robot.mass * (a + Vec3(0, 0, robot.gravity));
  const Vec3 ground = inertial - f - d;
  const Vec3 moment = r.cross(inertial - d) - (r + robot.rotation * r_cm).cross(f);
  const Vec3 n = Vec3::UnitZ();
  return n.cross(moment) / n.dot(ground);
}

SolveTimeStats solve_time_stats(std::vector<double> ms) {
  SolveTimeStats s;
  s.count = static_cast<int>(ms.size());
  if (ms.empty()) return s;
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  s.median_ms = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(n);
  s.p90_ms = ms[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n))) - 1)];
  s.max_ms = ms.back();
  return s;
}

namespace {

double friction_load(const Vec3& a, const Vec3& f, const RobotParams& p) {
  const double normal = p.mass * (a.z() + p.gravity) - f.z();
  const double tangential = std::max(std::abs(p.mass * a.x() - f.x()), std::abs(p.mass * a.y() - f.y()));
  return normal > 0 ? tangential / (p.mu * normal) : std::numeric_limits<double>::infinity();
}

}  // namespace

ScenarioResult run_scenario(const Scenario& sc, const std::function<void(const Plan&)>& on_plan) {
  ScenarioResult result;
  ScenarioMetrics& m = result.metrics;
  m.min_zmp_margin = std::numeric_limits<double>::infinity();

  Environment env = sc.env;
  for (const auto& d : draw_disturbances(sc.random, sc.sim.seed)) env.disturbances.push_back(d);
  for (const auto& d : env.disturbances) m.disturbance_response.push_back({d, Vec3::Zero(), 0});

  RobotParams robot = sc.planner.robot;
  robot.rotation = sc.initial.rotation;
  const ManipContact& contact = sc.task.contact;
  const double cycle = is_stationary(sc.planner.gait, sc.task.v_des) ? sc.planner.gait.hold_horizon
                                                                     : gait_cycle_duration(sc.planner.gait, sc.task.v_des);
  const int substeps = std::max(1, static_cast<int>(std::lround(sc.sim.tick / sc.sim.dt)));
  const double dt = sc.sim.tick / substeps;

  SimState s;
  s.r = sc.initial.r;
  s.v = sc.initial.v;
  s.a = sc.initial.a;
  s.f_actual = sc.initial.f_manip;
  s.anchor = sc.initial.r + robot.rotation * contact.r_cm;
  s.seed = sc.sim.seed;
  if (env.payload_onset) s.payload_mass = env.payload_force.norm() / robot.gravity;

  RobotState meas = sc.initial;
  std::optional<Plan> current;
  std::vector<double> solve_ms, warm_ms;
  double track_sq = 0.0;
  int track_n = 0;
  double horizon_sum = 0.0;

  auto score = [&](const Plan& plan, const SimState& st) {
    const SimForces fz = sim_forces(st, plan, env, robot, contact, st.t, st.r, st.v);
    const Vec3 z = measured_zmp(st.r, fz.accel, fz.f_actual, fz.disturbance, contact.r_cm, robot);
    const double tau = std::clamp(st.t - plan.t_created, 0.0, plan.horizon);
    const double margin = plan.support.at(tau).margin_of(z.head<2>());
    if (margin < m.min_zmp_margin) m.min_zmp_margin = margin;
    if (margin < 0 && !m.zmp_exit) {
      m.zmp_exit = true;
      m.first_exit_time = st.t;
    }
    const Eigen::Vector4d fr = friction_rows(fz.planned.a, fz.f_planned, robot);
    if (fr.maxCoeff() > 1e-6) ++m.friction_violations;
    return std::make_pair(z, margin);
  };

  while (s.t < sc.sim.duration - 1e-9) {
    meas.r = s.r;
    meas.v = s.v;
    meas.a = s.a;
    meas.f_manip = s.f_actual;
    meas.gait_phase = std::fmod(sc.initial.gait_phase + s.t, cycle);

    Plan plan;
    try {
      plan = plan_once(meas, sc.task, sc.planner, current ? &*current : nullptr, s.t);
    } catch (const std::exception& e) {
      m.failed = true;
      m.failure = e.what();
      break;
    }
    ++m.plans;
    if (plan.stale) {
      ++m.stale_plans;
      if (plan.stats.message.find("failed validation") != std::string::npos) ++m.rejected_plans;
    } else {
      if (plan.stats.status == SolveStatus::kOptimal) ++m.optimal_plans;
      solve_ms.push_back(plan.stats.solve_ms);
      if (plan.stats.warm_started) warm_ms.push_back(plan.stats.solve_ms);
      horizon_sum += plan.horizon;
    }
    if (on_plan) on_plan(plan);

    TickRecord rec;
    rec.t = s.t;
    rec.r = s.r;
    rec.v = s.v;
    const PlanSample head = sample_plan(plan, 0.0);
    rec.a = head.a;
    rec.f = head.f;
    rec.f_actual = s.f_actual;
    rec.solve_ms = plan.stats.solve_ms;
    rec.stale = plan.stale;
    rec.friction_ratio = friction_load(head.a, head.f, robot);
    for (std::size_t k = 0; k < env.disturbances.size(); ++k) {
      if (env.disturbances[k].active(s.t)) {
        auto& resp = m.disturbance_response[k];
        resp.mean_planned_force += head.f;
        ++resp.samples;
        if (s.t >= env.disturbances[k].t_start + sc.sim.settle_time - 1e-9) {
          resp.settled_planned_force += head.f;
          ++resp.settled_samples;
        }
      }
    }

    try {
      const auto [z, margin] = score(plan, s);
      rec.zmp = z.head<2>();
      rec.margin = margin;
      const Vec2 ref = (sc.initial.r + sc.task.v_des * s.t).head<2>();
      track_sq += (s.r.head<2>() - ref).squaredNorm();
      ++track_n;
      result.log.push_back(rec);
      const double t_end = std::min(s.t + sc.sim.tick, sc.sim.duration);
      while (s.t < t_end - 1e-12) {
        s = step(s, plan, std::min(dt, t_end - s.t), env, robot, contact);
        if (s.t < t_end - 1e-12) score(plan, s);
      }
    } catch (const HorizonExhausted& e) {
      m.failed = true;
      m.failure = e.what();
      break;
    }
    // a touchdown on the tick boundary belongs to the next tick
    meas.feet = plan.support.at(std::clamp(s.t - plan.t_created + 1e-9, 0.0, plan.horizon)).feet;
    current = std::move(plan);
  }

  if (current && !m.failed) score(*current, s);
  for (auto& r : m.disturbance_response) {
    if (r.samples > 0) r.mean_planned_force /= r.samples;
    if (r.settled_samples > 0) r.settled_planned_force /= r.settled_samples;
  }
  m.tracking_rms = track_n ? std::sqrt(track_sq / track_n) : 0.0;
  m.displacement = s.r - sc.initial.r;
  m.solve = solve_time_stats(solve_ms);
  m.warm_solve = solve_time_stats(warm_ms);
  const int ok = m.solve.count;
  m.horizon = ok ? horizon_sum / ok : 0.0;
  m.horizon_to_solve = (ok && m.solve.median_ms > 0) ? m.horizon / (1e-3 * m.solve.median_ms) : 0.0;
  if (!std::isfinite(m.min_zmp_margin)) m.min_zmp_margin = 0.0;
  return result;
}

}  // namespace lmplan
