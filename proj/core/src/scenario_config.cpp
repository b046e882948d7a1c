#include "lmplan/scenario_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace lmplan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  if (used != v.size() || std::isnan(out)) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

struct Entries {
  std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)
  std::set<std::string> used;

  bool has(const std::string& k) const { return values.count(k) > 0; }

  const std::string& raw(const std::string& k) {
    used.insert(k);
    return values.at(k).first;
  }

  void number(const std::string& k, double& out) {
    if (has(k)) out = parse_double(k, raw(k));
  }
  void integer(const std::string& k, int& out) {
    if (!has(k)) return;
    const double v = parse_double(k, raw(k));
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("key '" + k + "' must be an integer");
    out = static_cast<int>(v);
  }
  void vec(const std::string& k, Vec3& out) {
    if (!has(k)) return;
    const auto v = parse_list(k, raw(k));
    if (v.size() != 3) throw ConfigError("key '" + k + "' needs 3 comma-separated values");
    out = Vec3(v[0], v[1], v[2]);
  }
  void mask(const std::string& k, AxisMask& out) {
    if (!has(k)) return;
    const auto v = parse_list(k, raw(k));
    if (v.size() != 3) throw ConfigError("key '" + k + "' needs 3 comma-separated 0/1 flags");
    for (std::size_t i = 0; i < 3; ++i) {
      if (v[i] != 0.0 && v[i] != 1.0) throw ConfigError("key '" + k + "' flags must be 0 or 1");
      out[i] = v[i] == 1.0;
    }
  }
  std::optional<AxisMask> optional_mask(const std::string& k) {
    if (!has(k)) return std::nullopt;
    AxisMask m{};
    mask(k, m);
    return m;
  }
};

Entries tokenize(const std::string& text) {
  Entries e;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key");
    if (e.values.count(key)) throw ConfigError("line " + std::to_string(n) + ": duplicate key '" + key + "'");
    e.values[key] = {value, n};
  }
  return e;
}

}  // namespace

void set_horizon(PlannerConfig& cfg, double horizon) {
  if (!(horizon > 0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  GaitParams& g = cfg.gait;
  const double nominal = 2.0 * (g.full_support_duration + g.diagonal_duration);
  const double f = horizon / nominal;
  g.full_support_duration *= f;
  g.diagonal_duration *= f;
  g.hold_horizon = horizon;
}

Scenario parse_scenario(const std::string& text) {
  Entries e = tokenize(text);
  Scenario sc;

  if (e.has("scenario.name")) sc.name = e.raw("scenario.name");

  RobotParams& robot = sc.planner.robot;
  e.number("robot.mass", robot.mass);
  e.number("robot.mu", robot.mu);
  e.number("robot.gravity", robot.gravity);
  sc.planner.gait.gravity = robot.gravity;
  double yaw = 0.0;
  e.number("robot.yaw", yaw);
  sc.initial.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  e.vec("robot.com", sc.initial.r);
  e.vec("robot.velocity", sc.initial.v);
  e.vec("robot.accel", sc.initial.a);
  e.vec("robot.force", sc.initial.f_manip);
  e.number("robot.gait_phase", sc.initial.gait_phase);
  const char* foot_names[4] = {"lf", "rf", "lh", "rh"};
  for (int i = 0; i < 4; ++i) {
    Vec3& f = sc.initial.feet[static_cast<std::size_t>(i)];
    f = Vec3(sc.planner.gait.hip_offsets[static_cast<std::size_t>(i)].x(),
             sc.planner.gait.hip_offsets[static_cast<std::size_t>(i)].y(), 0.0);
    e.vec(std::string("robot.foot.") + foot_names[i], f);
  }

  ManipContact& c = sc.task.contact;
  e.vec("manip.r_cm", c.r_cm);
  e.mask("manip.free", c.free_mask);
  e.vec("manip.f_lo", c.f_lo);
  e.vec("manip.f_hi", c.f_hi);
  int dof = 3;
  e.integer("manip.dof", dof);
  if (dof < 1) throw ConfigError("manip.dof must be positive");
  c.jacobian = MatX::Identity(3, dof);
  c.tau_limit = VecX::Constant(dof, 1e3);
  if (e.has("manip.jacobian")) {
    const auto v = parse_list("manip.jacobian", e.raw("manip.jacobian"));
    if (static_cast<int>(v.size()) != 3 * dof) throw ConfigError("manip.jacobian needs 3 x manip.dof values (row-major)");
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < dof; ++k) c.jacobian(r, k) = v[static_cast<std::size_t>(r * dof + k)];
  }
  if (e.has("manip.tau_limit")) {
    const auto v = parse_list("manip.tau_limit", e.raw("manip.tau_limit"));
    if (static_cast<int>(v.size()) != dof) throw ConfigError("manip.tau_limit needs manip.dof values");
    for (int k = 0; k < dof; ++k) c.tau_limit(k) = v[static_cast<std::size_t>(k)];
  }

  e.vec("task.v_des", sc.task.v_des);
  if (e.has("task.mode")) {
    try {
      sc.task.mode = parse_mode(e.raw("task.mode"));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }
  std::vector<ForceEvent> events;
  for (int i = 0;; ++i) {
    const std::string p = "task.event." + std::to_string(i) + ".";
    if (!e.has(p + "start") && !e.has(p + "end")) break;
    ForceEvent ev;
    ev.interval.t0 = events.empty() ? 0.0 : events.back().interval.tf;
    e.number(p + "start", ev.interval.t0);
    ev.interval.tf = std::numeric_limits<double>::infinity();
    e.number(p + "end", ev.interval.tf);
    e.vec(p + "force", ev.force);
    e.vec(p + "rate", ev.rate);
    e.vec(p + "accel", ev.accel);
    ev.free_mask = e.optional_mask(p + "free");
    events.push_back(ev);
  }
  if (events.empty()) {
    ForceEvent ev;
    ev.interval = {0.0, std::numeric_limits<double>::infinity()};
    events.push_back(ev);
  }

  GaitParams& g = sc.planner.gait;
  e.number("gait.full_support", g.full_support_duration);
  e.number("gait.diagonal", g.diagonal_duration);
  e.number("gait.reference_speed", g.reference_speed);
  e.number("gait.min_scale", g.min_cycle_scale);
  e.number("gait.hold_horizon", g.hold_horizon);
  e.number("gait.margin", g.polygon_margin);
  e.number("gait.foot_half_size", g.foot_half_size);
  e.number("gait.min_segment", g.min_segment);
  if (e.has("planner.horizon")) set_horizon(sc.planner, parse_double("planner.horizon", e.raw("planner.horizon")));

  CostWeights& w = sc.planner.weights;
  e.number("weights.track_value", w.track_value);
  e.number("weights.track_rate", w.track_rate);
  e.number("weights.track_accel", w.track_accel);
  e.number("weights.deviation", w.deviation);
  e.number("weights.initial_match", w.initial_match);
  e.number("weights.min_accel", w.min_accel);

  SolverOptions& so = sc.planner.solver;
  e.integer("solver.max_sqp_iters", so.max_sqp_iters);
  e.integer("solver.max_qp_iters", so.max_qp_iters);
  e.number("solver.constraint_tol", so.constraint_tol);
  e.number("solver.kkt_tol", so.kkt_tol);
  e.number("solver.backtrack", so.backtrack);
  e.number("solver.merit_penalty", so.merit_penalty);
  e.number("solver.step_tol", so.step_tol);

  e.number("sim.dt", sc.sim.dt);
  e.number("sim.tick", sc.sim.tick);
  e.number("sim.duration", sc.sim.duration);
  e.number("sim.settle_time", sc.sim.settle_time);
  if (e.has("sim.seed")) {
    const double s = parse_double("sim.seed", e.raw("sim.seed"));
    if (s < 0 || s != std::floor(s)) throw ConfigError("sim.seed must be a non-negative integer");
    sc.sim.seed = static_cast<std::uint64_t>(s);
  }
  for (int i = 0;; ++i) {
    const std::string p = "sim.disturbance." + std::to_string(i) + ".";
    if (!e.has(p + "start")) break;
    Disturbance d;
    e.number(p + "start", d.t_start);
    e.number(p + "duration", d.duration);
    e.vec(p + "force", d.force);
    if (!(d.duration > 0)) throw ConfigError(p + "duration must be positive");
    sc.env.disturbances.push_back(d);
  }
  RandomDisturbances& rd = sc.random;
  e.integer("sim.random.count", rd.count);
  e.number("sim.random.first", rd.first);
  e.number("sim.random.period", rd.period);
  e.number("sim.random.duration", rd.duration);
  e.number("sim.random.min_force", rd.min_force);
  e.number("sim.random.max_force", rd.max_force);

  if (e.has("env.payload.onset")) {
    double onset = 0.0;
    e.number("env.payload.onset", onset);
    sc.env.payload_onset = onset;
  }
  e.vec("env.payload.force", sc.env.payload_force);
  e.mask("env.payload.axes", sc.env.payload_axes);
  e.mask("env.spring.axes", sc.env.spring_axes);
  e.vec("env.spring.stiffness", sc.env.stiffness);
  e.vec("env.spring.damping", sc.env.damping);

  for (const auto& [key, entry] : e.values) {
    if (!e.used.count(key)) throw ConfigError("line " + std::to_string(entry.second) + ": unknown key '" + key + "'");
  }

  try {
    sc.task.events = ForceSchedule(events);
    sc.task.validate();
    robot.validate();
    sc.initial.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
  if (!(sc.sim.dt > 0) || !(sc.sim.tick > 0) || !(sc.sim.duration > 0)) {
    throw ConfigError("sim.dt, sim.tick and sim.duration must be positive");
  }
  if (sc.random.count > 0 && !(sc.random.min_force >= 0 && sc.random.max_force >= sc.random.min_force)) {
    throw ConfigError("sim.random force band is invalid");
  }
  return sc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

void apply_overrides(Scenario& sc, const ScenarioOverrides& o) {
  if (o.mode) sc.task.mode = *o.mode;
  if (o.seed) sc.sim.seed = *o.seed;
  if (o.horizon) set_horizon(sc.planner, *o.horizon);
  if (o.tick_ms) {
    if (!(*o.tick_ms > 0)) throw ConfigError("tick must be positive");
    sc.sim.tick = *o.tick_ms * 1e-3;
    sc.sim.dt = std::min(sc.sim.dt, sc.sim.tick);
  }
}

std::string config_digest(const std::string& text) {
  const Entries e = tokenize(text);
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : e.values) {
    feed(k);
    feed("=");
    feed(v.first);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lmplan
