#pragma once

#include "lmplan/plan.hpp"
#include "lmplan/problem.hpp"

#include <string>
#include <vector>

namespace lmplan {

struct CheckTolerances {
  double junction = 1e-8;
  double initial = 1e-8;
  double zmp = 1e-6;
  double friction = 1e-6;
  double free_force = 1e-8;
  double torque = 1e-6;
  double box = 1e-6;
};

/// Worst violation of each constraint family over all sample times of a plan.
struct CheckReport {
  double junction_position = 0.0;
  double junction_velocity = 0.0;
  double initial_position = 0.0;
  double initial_velocity = 0.0;
  double zmp = 0.0;
  double friction = 0.0;
  double free_force = 0.0;
  double torque = 0.0;
  double box = 0.0;
  int samples = 0;

  std::vector<std::string> failures(const CheckTolerances& tol = {}) const;
  bool passed(const CheckTolerances& tol = {}) const { return failures(tol).empty(); }
};

/// Re-evaluates every constraint from the plan's trajectories, independent of
/// the matrices used by the solver. Baseline plans are checked against the
/// constraints that mode enforces (manipulation force left out of ZMP and
/// friction; free-axis and arm limits not imposed).
CheckReport check_plan(const Plan& plan, const RobotParams& robot, const ManipContact& contact);

}  // namespace lmplan
