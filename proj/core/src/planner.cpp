#include "lmplan/planner.hpp"

#include "lmplan/plan_check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace lmplan {

void RobotState::validate() const {
  if (!r.allFinite() || !v.allFinite() || !a.allFinite() || !f_manip.allFinite() || !rotation.allFinite()) {
    throw std::invalid_argument("robot state must be finite");
  }
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw std::invalid_argument("robot rotation must be orthonormal");
  }
  for (const auto& f : feet) {
    if (!f.allFinite()) throw std::invalid_argument("foot positions must be finite");
  }
  if (!std::isfinite(gait_phase)) throw std::invalid_argument("gait phase must be finite");
}

std::string to_string(PlanMode m) { return m == PlanMode::kFull ? "full" : "baseline"; }

PlanMode parse_mode(const std::string& s) {
  if (s == "full") return PlanMode::kFull;
  if (s == "baseline") return PlanMode::kBaseline;
  throw std::invalid_argument("mode must be 'full' or 'baseline', got '" + s + "'");
}

PlanSample sample_plan(const Plan& plan, double t) {
  if (!(t >= -1e-12) || t > plan.horizon + 1e-12) {
    throw DomainError("sample time " + std::to_string(t) + " outside plan horizon [0, " +
                      std::to_string(plan.horizon) + "]");
  }
  t = std::clamp(t, 0.0, plan.horizon);
  PlanSample s;
  s.r = plan.motion.eval(t, 0);
  s.v = plan.motion.eval(t, 1);
  s.a = plan.motion.eval(t, 2);
  s.f = plan.force.eval(t, 0);
  return s;
}

void TaskSpec::validate() const {
  if (!v_des.allFinite()) throw std::invalid_argument("desired velocity must be finite");
  if (events.events().empty()) throw std::invalid_argument("task needs at least one force event");
  contact.validate();
}

namespace {

struct ForceWindow {
  TimeDomain domain;  // plan-relative
  std::size_t event = 0;
};

std::vector<ForceWindow> force_windows(const ForceSchedule& events, double now, double horizon, double min_len) {
  std::vector<ForceWindow> out;
  const auto& ev = events.events();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double t0 = std::max(ev[i].interval.t0 - now, 0.0);
    const double tf = std::min(ev[i].interval.tf - now, horizon);
    if (tf <= t0) continue;
    if (!out.empty() && tf - t0 < min_len) {
      out.back().domain.tf = tf;  // sliver at the horizon end
      continue;
    }
    if (!out.empty() && out.back().domain.duration() < min_len) {
      // sliver at the start: the later event takes it over
      out.back() = {{out.back().domain.t0, tf}, i};
      continue;
    }
    out.push_back({{t0, tf}, i});
  }
  if (out.empty()) throw PlanningError("force events do not cover the planning horizon");
  if (out.front().domain.t0 > 0.0 || out.back().domain.tf < horizon - 1e-12) {
    throw PlanningError("force events do not cover the planning horizon");
  }
  out.back().domain.tf = horizon;
  return out;
}

Spline3 fit_piece(const TimeDomain& d, const std::function<Vec3(double)>& value) {
  const auto ts = sample_times(d);
  Mat6 V;
  Eigen::Matrix<double, 6, 3> Y;
  for (int k = 0; k < 6; ++k) {
    V.row(k) = basis_row(ts[static_cast<std::size_t>(k)] - d.t0, 0).transpose();
    Y.row(k) = value(ts[static_cast<std::size_t>(k)]).transpose();
  }
  const Eigen::Matrix<double, 6, 3> C = V.colPivHouseholderQr().solve(Y);
  Spline3 s;
  s.x = C.col(0);
  s.y = C.col(1);
  s.z = C.col(2);
  s.domain = d;
  return s;
}

void put(VecX& x, int offset, const Spline3& s) { x.segment(offset, kCoeffsPerSpline) = s.stacked(); }

// Rounding must not push the start of the first kept piece past zero.
TimeDomain shifted(const TimeDomain& d, double t_d) {
  TimeDomain out{d.t0 - t_d, d.tf - t_d};
  if (out.t0 > 0.0 && out.t0 < 1e-9) out.t0 = 0.0;
  return out;
}

Plan shift_plan(const Plan& prev, double t_d) {
  Plan out = prev;
  std::vector<Spline3> motion, force;
  std::vector<SupportPolygon> polys;
  for (std::size_t i = 0; i < prev.motion.pieces().size(); ++i) {
    Spline3 s = prev.motion.pieces()[i];
    if (s.domain.tf - t_d <= 1e-9) continue;
    s.domain = shifted(s.domain, t_d);
    motion.push_back(s);
    SupportPolygon p = prev.support.polygons[i];
    p.interval = s.domain;
    polys.push_back(p);
  }
  std::vector<AxisMask> masks;
  for (std::size_t j = 0; j < prev.force.pieces().size(); ++j) {
    Spline3 s = prev.force.pieces()[j];
    if (s.domain.tf - t_d <= 1e-9) continue;
    s.domain = shifted(s.domain, t_d);
    force.push_back(s);
    if (j < prev.force_free.size()) masks.push_back(prev.force_free[j]);
  }
  if (motion.empty() || force.empty()) throw PlanningError("previous plan horizon exhausted");
  out.motion = PiecewiseTrajectory(std::move(motion));
  out.force = PiecewiseTrajectory(std::move(force));
  out.support.polygons = std::move(polys);
  out.force_free = std::move(masks);
  out.horizon = prev.horizon - t_d;
  out.t_created = prev.t_created + t_d;
  return out;
}

}  // namespace

std::optional<VecX> shift_previous(const Plan& previous, double t_d, const SplineSchedule& s) {
  if (!(t_d >= 0.0) || t_d > previous.horizon) return std::nullopt;
  const DecisionLayout L = s.layout();
  VecX x = VecX::Zero(L.size());
  const double end = previous.horizon;
  const Vec3 r_end = previous.motion.eval(end, 0);
  const Vec3 v_end = previous.motion.eval(end, 1);
  const Vec3 f_end = previous.force.eval(end, 0);
  // A sample on a previous junction is taken from the piece on the side of
  // the new piece's interior, so aligned pieces are reproduced exactly.
  auto lookup = [](const PiecewiseTrajectory& tr, double u, double toward) -> const Spline3& {
    const double nudge = toward > u ? 1e-9 : (toward < u ? -1e-9 : 0.0);
    const double lo = tr.pieces().front().domain.t0, hi = tr.pieces().back().domain.tf;
    return tr.pieces()[tr.piece_index(std::clamp(u + nudge, lo, hi))];
  };
  for (int i = 0; i < L.n_motion; ++i) {
    const TimeDomain d = s.motion[static_cast<std::size_t>(i)];
    const double mid = 0.5 * (d.t0 + d.tf) + t_d;
    put(x, L.motion_offset(i), fit_piece(d, [&](double t) -> Vec3 {
          const double u = t + t_d;
          if (u <= end) return lookup(previous.motion, u, mid).eval(u, 0);
          return r_end + v_end * (u - end);
        }));
  }
  for (int j = 0; j < L.n_force; ++j) {
    const TimeDomain d = s.force[static_cast<std::size_t>(j)];
    const double mid = 0.5 * (d.t0 + d.tf) + t_d;
    put(x, L.force_offset(j), fit_piece(d, [&](double t) -> Vec3 {
          const double u = t + t_d;
          if (u <= end) return lookup(previous.force, u, mid).eval(u, 0);
          return f_end;
        }));
  }
  return x;
}

VecX cold_start(const RobotState& state, const SplineSchedule& s, const DesiredForce& force) {
  const DecisionLayout L = s.layout();
  VecX x = VecX::Zero(L.size());
  for (int i = 0; i < L.n_motion; ++i) {
    const double t0 = s.motion[static_cast<std::size_t>(i)].t0;
    for (int axis = 0; axis < 3; ++axis) {
      const int o = L.motion_offset(i, axis);
      x(o + 4) = state.v(axis);
      x(o + 5) = state.r(axis) + state.v(axis) * t0;
    }
  }
  for (int j = 0; j < L.n_force; ++j) {
    const ForceSample f = force(j, s.force[static_cast<std::size_t>(j)].t0);
    for (int axis = 0; axis < 3; ++axis) {
      const int o = L.force_offset(j, axis);
      x(o + 3) = 0.5 * f.accel(axis);
      x(o + 4) = f.rate(axis);
      x(o + 5) = f.value(axis);
    }
  }
  return x;
}

PlanningInstance build_instance(const RobotState& state, const TaskSpec& task, const PlannerConfig& config,
                                const Plan* previous, double now) {
  state.validate();
  task.validate();
  config.robot.validate();
  RobotParams robot = config.robot;
  robot.rotation = state.rotation;

  PlanningInstance inst;
  StanceState stance{state.feet, state.r, state.v};
  inst.support = generate_support_sequence(stance, task.v_des, config.gait, state.gait_phase);
  const double horizon = inst.support.cycle_duration;
  for (const auto& poly : inst.support.polygons) inst.schedule.motion.push_back(poly.interval);

  const auto windows = force_windows(task.events, now, horizon, config.min_force_segment);
  std::vector<std::size_t> event_of;
  for (const auto& w : windows) {
    inst.schedule.force.push_back(w.domain);
    event_of.push_back(w.event);
    const auto& e = task.events.events()[w.event];
    inst.force_free.push_back(e.free_mask ? *e.free_mask : task.contact.free_mask);
  }
  const ForceSchedule events = task.events;
  inst.desired_force = [events, event_of, now](int j, double t) {
    return event_profile(events.events()[event_of[static_cast<std::size_t>(j)]], t + now);
  };

  const bool full = task.mode == PlanMode::kFull;
  const SplineSchedule& s = inst.schedule;
  const DecisionLayout L = s.layout();

  ProblemParts parts;
  parts.costs.push_back(task_tracking_cost(s, DesiredMotion{state.r, task.v_des}, inst.desired_force, config.weights));
  parts.costs.push_back(min_accel_cost(s, config.weights.min_accel));
  parts.costs.push_back(initial_match_cost(s, state.a, state.f_manip, config.weights.initial_match));

  std::optional<VecX> warm;
  if (previous) {
    const double t_d = now - previous->t_created;
    if (t_d >= 0.0 && t_d <= previous->horizon) {
      parts.costs.push_back(deviation_cost(s, previous->motion, previous->force, t_d, config.weights.deviation));
    }
    warm = shift_previous(*previous, t_d, s);
  }

  parts.equalities.push_back(junction_eqs(s));
  parts.equalities.push_back(initial_point_eqs(s, state.r, state.v));
  if (full) {
    parts.equalities.push_back(free_motion_eqs(s, inst.force_free));
  } else {
    parts.equalities.push_back(freeze_force_eqs(s, inst.desired_force));
  }

  parts.inequalities.push_back(friction_pyramid_ineqs(s, robot, full));
  parts.inequalities.push_back(zmp_ineqs(s, inst.support, robot, task.contact.r_cm, full));
  if (full) parts.inequalities.push_back(force_limit_ineqs(s, task.contact, inst.force_free));

  inst.problem = assemble(L, parts);
  inst.warm = warm.has_value();
  inst.x0 = warm ? *warm : cold_start(state, s, inst.desired_force);
  return inst;
}

Plan stale_copy(const Plan& previous, double now) {
  const double t_d = now - previous.t_created;
  if (!(t_d >= 0.0) || t_d >= previous.horizon) throw PlanningError("previous plan horizon exhausted");
  Plan out = shift_plan(previous, t_d);
  out.stale = true;
  return out;
}

Plan plan_once(const RobotState& state, const TaskSpec& task, const PlannerConfig& config, const Plan* previous,
               double now) {
  const auto start = std::chrono::steady_clock::now();
  std::string failure;
  try {
    PlanningInstance inst = build_instance(state, task, config, previous, now);
    const std::vector<int>* warm_set = nullptr;
    if (previous && inst.warm && !previous->stale && previous->support.polygons.size() == inst.support.polygons.size()) {
      warm_set = &previous->active_set;
    }
    const NlpResult res = solve_nlp(inst.problem, inst.x0, config.solver, warm_set);

    Plan plan;
    const DecisionLayout L = inst.problem.layout;
    std::vector<Spline3> motion, force;
    for (int i = 0; i < L.n_motion; ++i) {
      motion.push_back(Spline3::from_stacked(res.x.segment(L.motion_offset(i), kCoeffsPerSpline),
                                             inst.schedule.motion[static_cast<std::size_t>(i)]));
    }
    for (int j = 0; j < L.n_force; ++j) {
      force.push_back(Spline3::from_stacked(res.x.segment(L.force_offset(j), kCoeffsPerSpline),
                                            inst.schedule.force[static_cast<std::size_t>(j)]));
    }
    plan.motion = PiecewiseTrajectory(std::move(motion));
    plan.force = PiecewiseTrajectory(std::move(force));
    plan.t_created = now;
    plan.horizon = inst.support.cycle_duration;
    plan.support = std::move(inst.support);
    plan.force_free = std::move(inst.force_free);
    plan.mode = task.mode;
    plan.created_from = state;
    plan.active_set = res.active_set;
    plan.stats.status = res.status;
    plan.stats.iterations = res.iterations;
    plan.stats.qp_iterations = res.qp_iterations;
    plan.stats.kkt_residual = res.kkt_residual;
    plan.stats.solve_ms = 1e3 * res.solve_time;
    plan.stats.warm_started = inst.warm;
    plan.stats.message = res.message;

    if (res.status == SolveStatus::kOptimal) {
      RobotParams robot = config.robot;
      robot.rotation = state.rotation;
      const CheckReport rep = check_plan(plan, robot, task.contact);
      const auto bad = rep.failures();
      if (bad.empty()) return plan;
      failure = to_string(res.status) + " solve failed validation: " + bad.front();
    } else {
      failure = to_string(res.status) + ": " + res.message;
    }
  } catch (const ZmpInvalidError& e) {
    failure = e.what();
  } catch (const ScheduleError& e) {
    throw PlanningError(std::string("schedule: ") + e.what());
  }

  if (!previous) throw PlanningError("planning failed without a previous plan: " + failure);
  Plan out = stale_copy(*previous, now);
  out.stats.message = failure;
  out.stats.status = SolveStatus::kInfeasible;
  out.stats.solve_ms = 1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace lmplan
