#pragma once

#include "lmplan/plan.hpp"
#include "lmplan/planner.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lmplan {

/// External force on the base over [t_start, t_start + duration).
struct Disturbance {
  double t_start = 0.0;
  double duration = 0.0;
  Vec3 force = Vec3::Zero();

  bool active(double t) const { return t >= t_start && t < t_start + duration; }
};

/// Random base pushes: horizontal direction uniform, magnitude uniform in
/// [min_force, max_force], one push of `duration` every `period` seconds.
struct RandomDisturbances {
  int count = 0;
  double first = 1.0;
  double period = 2.0;
  double duration = 1.0;
  double min_force = 5.0;
  double max_force = 20.0;
};

std::vector<Disturbance> draw_disturbances(const RandomDisturbances& spec, std::uint64_t seed);

/// What the end-effector actually experiences.
struct Environment {
  // Payload replaces the planned force on `payload_axes` from `payload_onset` on.
  std::optional<double> payload_onset;
  Vec3 payload_force = Vec3::Zero();
  AxisMask payload_axes{false, false, true};
  // Spring-damper reaction of a held object, anchored where the end-effector
  // is at the start of the run; added to the planned force.
  AxisMask spring_axes{false, false, false};
  Vec3 stiffness = Vec3::Zero();
  Vec3 damping = Vec3::Zero();
  std::vector<Disturbance> disturbances;

  Vec3 disturbance_at(double t) const;
};

struct SimState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 external = Vec3::Zero();  // disturbance at the last evaluation
  Vec3 f_actual = Vec3::Zero();  // force on the robot at the end-effector
  Vec3 a = Vec3::Zero();         // realized acceleration at time t
  Vec3 anchor = Vec3::Zero();    // spring rest position of the end-effector
  double payload_mass = 0.0;
  double t = 0.0;
  std::uint64_t seed = 0;
};

/// Signals that the plan no longer covers the requested step.
class HorizonExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forces and acceleration at run time t for state (r, v) under a plan.
struct SimForces {
  Vec3 f_planned;
  Vec3 f_actual;
  Vec3 disturbance;
  Vec3 accel;
  PlanSample planned;
};
SimForces sim_forces(const SimState& s, const Plan& plan, const Environment& env, const RobotParams& robot,
                     const ManipContact& contact, double t, const Vec3& r, const Vec3& v);

/// One RK4 step of the point mass.
SimState step(const SimState& s, const Plan& plan, double dt, const Environment& env, const RobotParams& robot,
              const ManipContact& contact);

struct SimSettings {
  double dt = 0.005;
  double tick = 0.05;
  double duration = 10.0;
  std::uint64_t seed = 1;
  double settle_time = 1.0;  // disturbance responses are also averaged after this delay
};

struct Scenario {
  std::string name = "scenario";
  RobotState initial;
  TaskSpec task;
  PlannerConfig planner;
  SimSettings sim;
  Environment env;
  RandomDisturbances random;
};

struct TickRecord {
  double t = 0.0;
  Vec3 r, v, a, f;  // realized state, planned acceleration and planned force
  Vec3 f_actual;
  Vec2 zmp = Vec2::Zero();
  double margin = 0.0;
  double solve_ms = 0.0;
  double friction_ratio = 0.0;  // largest friction row load relative to its bound
  bool stale = false;
};

struct SolveTimeStats {
  int count = 0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double p90_ms = 0.0;
  double max_ms = 0.0;
};

SolveTimeStats solve_time_stats(std::vector<double> ms);

struct DisturbanceResponse {
  Disturbance disturbance;
  Vec3 mean_planned_force = Vec3::Zero();
  int samples = 0;
  // same average restricted to ticks at least settle_time after onset
  Vec3 settled_planned_force = Vec3::Zero();
  int settled_samples = 0;
};

struct ScenarioMetrics {
  double min_zmp_margin = 0.0;
  bool zmp_exit = false;
  double first_exit_time = -1.0;
  int friction_violations = 0;
  double tracking_rms = 0.0;
  Vec3 displacement = Vec3::Zero();
  int plans = 0;
  int optimal_plans = 0;
  int stale_plans = 0;
  int rejected_plans = 0;  // solver claimed success but validation failed
  SolveTimeStats solve;
  SolveTimeStats warm_solve;
  double horizon = 0.0;
  double horizon_to_solve = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<DisturbanceResponse> disturbance_response;
};

struct ScenarioResult {
  ScenarioMetrics metrics;
  std::vector<TickRecord> log;
};

/// Closed loop: plan every tick, integrate the point mass, score.
ScenarioResult run_scenario(const Scenario& scenario, const std::function<void(const Plan&)>& on_plan = {});

/// Measured ZMP of the realized motion and the real end-effector force.
Vec3 measured_zmp(const Vec3& r, const Vec3& a, const Vec3& f, const Vec3& disturbance, const Vec3& r_cm,
                  const RobotParams& robot);

}  // namespace lmplan
