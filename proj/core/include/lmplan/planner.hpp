#pragma once

#include "lmplan/contact_schedule.hpp"
#include "lmplan/plan.hpp"
#include "lmplan/problem.hpp"
#include "lmplan/sqp.hpp"

#include <optional>
#include <stdexcept>

namespace lmplan {

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Task over the whole run. Force event times are absolute (run clock).
struct TaskSpec {
  Vec3 v_des = Vec3::Zero();
  ForceSchedule events;
  ManipContact contact;
  PlanMode mode = PlanMode::kFull;

  void validate() const;
};

struct PlannerConfig {
  RobotParams robot;
  GaitParams gait;
  CostWeights weights;
  SolverOptions solver;
  double min_force_segment = 1e-3;  // shorter force event slivers are absorbed
};

/// Everything needed to solve one planning instance.
struct PlanningInstance {
  PlannerProblem problem;
  SplineSchedule schedule;
  SupportSequence support;
  std::vector<AxisMask> force_free;
  DesiredForce desired_force;
  VecX x0;
  bool warm = false;
};

/// Builds schedule, costs and constraints for a planning call at run time `now`.
PlanningInstance build_instance(const RobotState& state, const TaskSpec& task, const PlannerConfig& config,
                                const Plan* previous, double now);

/// Warm-start vector for a new schedule: the previous plan sampled at the new
/// sample times shifted by t_d and interpolated spline by spline. Returns
/// nullopt (cold start) when t_d lies outside [0, previous horizon].
std::optional<VecX> shift_previous(const Plan& previous, double t_d, const SplineSchedule& schedule);

/// Cold start: constant-velocity motion from the measured state and force
/// splines following the desired profile.
VecX cold_start(const RobotState& state, const SplineSchedule& schedule, const DesiredForce& force);

/// Previous plan re-expressed relative to `now` and flagged stale.
Plan stale_copy(const Plan& previous, double now);

/// One receding-horizon planning step. Falls back to the previous plan
/// (stale) when the solve fails; throws PlanningError if there is none.
Plan plan_once(const RobotState& state, const TaskSpec& task, const PlannerConfig& config, const Plan* previous,
               double now);

}  // namespace lmplan
