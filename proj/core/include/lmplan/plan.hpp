#pragma once

#include "lmplan/contact_schedule.hpp"
#include "lmplan/qp_solver.hpp"
#include "lmplan/spline.hpp"

#include <string>
#include <vector>

namespace lmplan {

/// Measured robot state at a planning instant.
struct RobotState {
  Vec3 r = Vec3::Zero();  // CoM position
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 f_manip = Vec3::Zero();  // measured force on the robot at the end-effector
  Mat3 rotation = Mat3::Identity();
  FootArray feet{};
  double gait_phase = 0.0;  // seconds into the trot cycle

  void validate() const;
};

enum class PlanMode { kFull, kBaseline };

std::string to_string(PlanMode m);
PlanMode parse_mode(const std::string& s);

struct PlanStats {
  SolveStatus status = SolveStatus::kNumericalFailure;
  int iterations = 0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  double solve_ms = 0.0;
  bool warm_started = false;
  std::string message;
};

/// Immutable result of one planning call. Times inside the plan are relative
/// to t_created.
struct Plan {
  PiecewiseTrajectory motion;
  PiecewiseTrajectory force;
  double t_created = 0.0;
  double horizon = 0.0;
  SupportSequence support;
  std::vector<AxisMask> force_free;  // free axes per force spline
  PlanMode mode = PlanMode::kFull;
  RobotState created_from;
  PlanStats stats;
  std::vector<int> active_set;
  bool stale = false;  // previous plan reused after a failed solve
};

struct PlanSample {
  Vec3 r;
  Vec3 v;
  Vec3 a;
  Vec3 f;
};

/// Evaluates a plan at plan-relative time t in [0, horizon].
PlanSample sample_plan(const Plan& plan, double t);

}  // namespace lmplan
