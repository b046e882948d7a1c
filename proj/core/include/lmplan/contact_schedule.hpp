#pragma once

#include "lmplan/spline.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lmplan {

using Vec2 = Eigen::Vector2d;

/// Invalid schedule, polygon or force-event configuration.
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Foot order used throughout: left-front, right-front, left-hind, right-hind.
enum Foot : int { kLF = 0, kRF = 1, kLH = 2, kRH = 3 };
using FootArray = std::array<Vec3, 4>;
using ContactMask = std::array<bool, 4>;
using AxisMask = std::array<bool, 3>;

/// Edge line a*x + b*y + c <= 0 (inside), with (a, b) unit length.
struct HalfSpace {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double eval(const Vec2& p) const { return a * p.x() + b * p.y() + c; }
};

/// One edge row per polygon edge, for a convex CCW polygon. A positive margin
/// shrinks the polygon uniformly.
std::vector<HalfSpace> polygon_halfspaces(const std::vector<Vec2>& vertices, double margin = 0.0);

/// Convex hull (CCW, no collinear vertices) of a point set.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

struct SupportPolygon {
  std::vector<Vec2> vertices;        // CCW
  std::vector<HalfSpace> halfspaces; // shrunk by the safety margin
  std::vector<HalfSpace> boundary;   // unshrunk edges, for margin reporting
  TimeDomain interval;
  Vec3 normal = Vec3::UnitZ();
  ContactMask contacts{true, true, true, true};
  FootArray feet{};  // foot positions valid during this interval

  /// Signed distance of p inside the unshrunk polygon (negative outside).
  double margin_of(const Vec2& p) const;
};

struct SupportSequence {
  std::vector<SupportPolygon> polygons;
  double cycle_duration = 0.0;

  const SupportPolygon& at(double t) const;
};

struct GaitParams {
  double full_support_duration = 0.1;  // both full-support windows of a cycle
  double diagonal_duration = 0.3;      // each diagonal-pair support
  double reference_speed = 0.5;        // cycle shrinks above this speed
  double min_cycle_scale = 0.5;
  double hold_horizon = 0.8;           // stationary horizon
  double stationary_speed = 1e-3;
  double min_segment = 0.03;           // shorter leading/trailing segments are absorbed
  double foot_half_size = 0.03;        // square contact patch half width
  double polygon_margin = 0.02;
  double gravity = 9.81;
  std::array<Vec2, 4> hip_offsets{Vec2(0.3, 0.2), Vec2(0.3, -0.2), Vec2(-0.3, 0.2), Vec2(-0.3, -0.2)};
};

struct StanceState {
  FootArray feet{};
  Vec3 com = Vec3::Zero();
  Vec3 com_velocity = Vec3::Zero();
};

/// Full trot cycle duration for a desired velocity.
double gait_cycle_duration(const GaitParams& gait, const Vec3& v_des);
bool is_stationary(const GaitParams& gait, const Vec3& v_des);

/// LIP-style touchdown position for a foot touching down at time t_touchdown
/// (relative to the planning instant) and staying in stance for t_stance.
Vec2 lip_foothold(const GaitParams& gait, const StanceState& stance, int foot, const Vec3& v_des,
                  double t_touchdown, double t_stance);

/// Support polygons over one horizon. Stationary requests give one polygon
/// spanning the hold horizon; walking gives five polygons starting at
/// gait_phase seconds into the trot cycle (full, LF-RH, full, RF-LH, full at
/// phase zero).
SupportSequence generate_support_sequence(const StanceState& stance, const Vec3& v_des,
                                          const GaitParams& gait, double gait_phase = 0.0);

/// Contact state of the trot at a given phase (seconds into the cycle).
ContactMask trot_contacts(const GaitParams& gait, const Vec3& v_des, double gait_phase);

/// Desired manipulation force over [interval.t0, interval.tf). The profile is
/// force + rate*(t-t0) + accel*(t-t0)^2/2.
struct ForceEvent {
  TimeDomain interval;
  Vec3 force = Vec3::Zero();
  Vec3 rate = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
  std::optional<AxisMask> free_mask;  // overrides the contact's mask while active
};

struct ForceSample {
  Vec3 value = Vec3::Zero();
  Vec3 rate = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

ForceSample event_profile(const ForceEvent& event, double t);

/// Contiguous set of force events starting at time zero. The last event may
/// be open-ended (tf = +inf).
class ForceSchedule {
 public:
  ForceSchedule() = default;
  explicit ForceSchedule(std::vector<ForceEvent> events);

  const std::vector<ForceEvent>& events() const { return events_; }
  std::size_t event_index(double t) const;
  ForceSample at(double t) const;

 private:
  std::vector<ForceEvent> events_;
};

ForceSample force_profile_at(const ForceSchedule& schedule, double t);

/// Manipulator contact description: offset, free axes, arm Jacobian and limits.
struct ManipContact {
  Vec3 r_cm = Vec3::Zero();          // CoM to end-effector, body frame
  AxisMask free_mask{false, false, false};
  MatX jacobian = MatX::Zero(3, 0);  // 3 x d; torque = jacobian^T * f
  VecX tau_limit = VecX::Zero(0);    // d
  Vec3 f_lo = Vec3::Constant(-1e3);
  Vec3 f_hi = Vec3::Constant(1e3);

  void validate() const;
};

}  // namespace lmplan
