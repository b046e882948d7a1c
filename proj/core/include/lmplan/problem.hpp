#pragma once

#include "lmplan/contact_schedule.hpp"
#include "lmplan/spline.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmplan {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The support force n.F at a ZMP sample is too small for the ZMP to exist.
class ZmpInvalidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stacked decision vector: all motion splines (18 coefficients each, x/y/z
/// blocks) followed by all force splines.
struct DecisionLayout {
  int n_motion = 0;
  int n_force = 0;

  int size() const { return kCoeffsPerSpline * (n_motion + n_force); }
  int motion_offset(int i, int axis = 0) const { return kCoeffsPerSpline * i + kCoeffsPerAxis * axis; }
  int force_offset(int j, int axis = 0) const {
    return kCoeffsPerSpline * (n_motion + j) + kCoeffsPerAxis * axis;
  }
  bool operator==(const DecisionLayout&) const = default;
};

/// cost(x) = 0.5 x^T Q x + b^T x + constant
struct QuadCost {
  MatX Q;
  VecX b;
  double constant = 0.0;

  static QuadCost zero(int n);
  double value(const VecX& x) const { return 0.5 * x.dot(Q * x) + b.dot(x) + constant; }

  /// Adds weight * ||A x - y||^2.
  void add_least_squares(const MatX& A, const VecX& y, double weight);
  QuadCost& operator+=(const QuadCost& other);
};

/// A x = rhs
struct LinearEq {
  MatX A;
  VecX rhs;

  static LinearEq empty(int n) { return {MatX::Zero(0, n), VecX::Zero(0)}; }
  int rows() const { return static_cast<int>(A.rows()); }
  void append(const LinearEq& other);
  VecX residual(const VecX& x) const { return A * x - rhs; }
};

/// g(x) <= 0 with an analytic Jacobian.
struct NonlinearIneq {
  std::string name;
  int rows = 0;
  std::function<void(const VecX& x, VecX& g, MatX* jacobian)> eval;
};

/// G x <= h, nonlinear rows, and per-variable bounds lo <= x <= hi.
struct IneqSet {
  MatX G;
  VecX h;
  std::vector<NonlinearIneq> nonlinear;
  VecX lo;
  VecX hi;

  static IneqSet empty(int n);
  int linear_rows() const { return static_cast<int>(G.rows()); }
  int nonlinear_rows() const;
  void append_linear(const MatX& rows, const VecX& rhs);
  void append(const IneqSet& other);
};

struct RobotParams {
  double mass = 30.0;
  double mu = 0.3;
  double gravity = 9.81;
  Mat3 rotation = Mat3::Identity();  // body to inertial, constant over the horizon

  void validate() const;
};

struct CostWeights {
  double track_value = 10.0;
  double track_rate = 1.0;
  double track_accel = 0.1;
  double deviation = 1.0;
  double initial_match = 100.0;
  double min_accel = 1e-3;
};

/// Timing of every spline in a problem, in plan-relative seconds.
struct SplineSchedule {
  std::vector<TimeDomain> motion;
  std::vector<TimeDomain> force;

  DecisionLayout layout() const {
    return {static_cast<int>(motion.size()), static_cast<int>(force.size())};
  }
  /// Force spline owning time t (half-open, last closed).
  int force_index(double t) const;
};

/// Rows mapping the decision vector to the value (or derivative) of a spline
/// at absolute plan time t. Returns 3 x N.
MatX motion_selector(const DecisionLayout& layout, const SplineSchedule& s, int i, double t, int deriv);
MatX force_selector(const DecisionLayout& layout, const SplineSchedule& s, int j, double t, int deriv);

/// Desired motion: constant velocity from the measured position.
struct DesiredMotion {
  Vec3 start = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  Vec3 position(double t) const { return start + velocity * t; }
};

/// Desired force profile for force spline j at plan-relative time t.
using DesiredForce = std::function<ForceSample(int j, double t)>;

QuadCost task_tracking_cost(const SplineSchedule& s, const DesiredMotion& motion, const DesiredForce& force,
                            const CostWeights& w);

/// Penalizes differences to a previous plan evaluated t_d seconds later.
/// Samples whose shifted time falls outside the previous trajectory are skipped.
QuadCost deviation_cost(const SplineSchedule& s, const PiecewiseTrajectory& prev_motion,
                        const PiecewiseTrajectory& prev_force, double t_d, double weight);

QuadCost initial_match_cost(const SplineSchedule& s, const Vec3& measured_accel, const Vec3& measured_force,
                            double weight);

QuadCost min_accel_cost(const SplineSchedule& s, double weight);

LinearEq junction_eqs(const SplineSchedule& s);
LinearEq initial_point_eqs(const SplineSchedule& s, const Vec3& r0, const Vec3& v0);
LinearEq free_motion_eqs(const SplineSchedule& s, const std::vector<AxisMask>& free_per_spline);
/// Pins every force spline to the desired profile (baseline planner).
LinearEq freeze_force_eqs(const SplineSchedule& s, const DesiredForce& force);

/// Linearized friction pyramid at every motion sample. With
/// include_force = false the manipulation force terms are dropped.
IneqSet friction_pyramid_ineqs(const SplineSchedule& s, const RobotParams& p, bool include_force);

/// Friction rows evaluated for explicit acceleration and manipulation force;
/// each entry is lhs - rhs (<= 0 when satisfied).
Eigen::Vector4d friction_rows(const Vec3& accel, const Vec3& force, const RobotParams& p);

/// Ground support force F = m (a + g e_z) - f and moment T about the origin.
struct SupportWrench {
  Vec3 force;
  Vec3 moment;
};
SupportWrench support_wrench(const Vec3& com, const Vec3& accel, const Vec3& f_manip, const Vec3& r_cm,
                             const RobotParams& p);

/// ZMP point n x T / (n . F).
Vec3 zmp_point(const SupportWrench& w, const Vec3& normal);

/// One ZMP evaluation site: a motion sample with its polygon.
struct ZmpSample {
  int motion_spline = 0;
  int force_spline = -1;  // -1: manipulation force excluded
  double t = 0.0;
  std::vector<HalfSpace> halfspaces;
  Vec3 normal = Vec3::UnitZ();
};

struct ZmpResidual {
  VecX value;     // one entry per polygon edge
  MatX jacobian;  // rows x N
  double normal_force = 0.0;
};

/// Multiplied-through ZMP rows d.(n x T) + c (n . F) <= 0 and their Jacobian.
/// Throws ZmpInvalidError when n.F <= min_normal_force.
ZmpResidual zmp_residual(const VecX& x, const DecisionLayout& layout, const SplineSchedule& s,
                         const ZmpSample& sample, const RobotParams& p, const Vec3& r_cm,
                         double min_normal_force);

/// Same rows without the validity guard (used inside the solver).
ZmpResidual zmp_rows_unchecked(const VecX& x, const DecisionLayout& layout, const SplineSchedule& s,
                               const ZmpSample& sample, const RobotParams& p, const Vec3& r_cm);

std::vector<ZmpSample> zmp_samples(const SplineSchedule& s, const SupportSequence& support, bool include_force);

/// Nonlinear ZMP rows for all samples plus linear guard rows n.F >= min_normal_force.
IneqSet zmp_ineqs(const SplineSchedule& s, const SupportSequence& support, const RobotParams& p,
                  const Vec3& r_cm, bool include_force);

/// Arm torque rows J^T f <= tau_lim and per-axis box rows at every force
/// sample; box rows on free axes are omitted.
IneqSet force_limit_ineqs(const SplineSchedule& s, const ManipContact& contact,
                          const std::vector<AxisMask>& free_per_spline);

struct PlannerProblem {
  DecisionLayout layout;
  QuadCost cost;
  LinearEq eq;
  IneqSet ineq;

  int dimension() const { return layout.size(); }
  std::string dimension_report() const;
};

struct ProblemParts {
  std::vector<QuadCost> costs;
  std::vector<LinearEq> equalities;
  std::vector<IneqSet> inequalities;
};

PlannerProblem assemble(const DecisionLayout& layout, const ProblemParts& parts);

}  // namespace lmplan
