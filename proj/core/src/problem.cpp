#include "lmplan/problem.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace lmplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// weight * (row . c - target)^2 on one 6-coefficient axis block
void add_axis_term(QuadCost& cost, int offset, const Vec6& row, double target, double weight) {
  if (weight == 0.0) return;
  cost.Q.block<6, 6>(offset, offset) += 2.0 * weight * row * row.transpose();
  cost.b.segment<6>(offset) -= 2.0 * weight * target * row;
  cost.constant += weight * target * target;
}

void add_motion_terms(QuadCost& cost, const DecisionLayout& L, int i, double tau, int deriv, const Vec3& target,
                      double weight) {
  const Vec6 row = basis_row(tau, deriv);
  for (int axis = 0; axis < 3; ++axis) add_axis_term(cost, L.motion_offset(i, axis), row, target(axis), weight);
}

void add_force_terms(QuadCost& cost, const DecisionLayout& L, int j, double tau, int deriv, const Vec3& target,
                     double weight) {
  const Vec6 row = basis_row(tau, deriv);
  for (int axis = 0; axis < 3; ++axis) add_axis_term(cost, L.force_offset(j, axis), row, target(axis), weight);
}

bool in_domain(const PiecewiseTrajectory& traj, double t) {
  return !traj.empty() && t >= traj.start_time() && t <= traj.end_time();
}

}  // namespace

QuadCost QuadCost::zero(int n) { return {MatX::Zero(n, n), VecX::Zero(n), 0.0}; }

void QuadCost::add_least_squares(const MatX& A, const VecX& y, double weight) {
  Q += 2.0 * weight * A.transpose() * A;
  b -= 2.0 * weight * A.transpose() * y;
  constant += weight * y.squaredNorm();
}

QuadCost& QuadCost::operator+=(const QuadCost& other) {
  if (other.Q.rows() != Q.rows()) throw AssemblyError("cost contribution dimension mismatch");
  Q += other.Q;
  b += other.b;
  constant += other.constant;
  return *this;
}

void LinearEq::append(const LinearEq& other) {
  if (other.A.cols() != A.cols()) throw AssemblyError("equality contribution dimension mismatch");
  MatX a(A.rows() + other.A.rows(), A.cols());
  a << A, other.A;
  VecX r(rhs.size() + other.rhs.size());
  r << rhs, other.rhs;
  A = std::move(a);
  rhs = std::move(r);
}

IneqSet IneqSet::empty(int n) {
  IneqSet s;
  s.G = MatX::Zero(0, n);
  s.h = VecX::Zero(0);
  s.lo = VecX::Constant(n, -kInf);
  s.hi = VecX::Constant(n, kInf);
  return s;
}

int IneqSet::nonlinear_rows() const {
  int n = 0;
  for (const auto& c : nonlinear) n += c.rows;
  return n;
}

void IneqSet::append_linear(const MatX& rows, const VecX& rhs) {
  if (rows.cols() != G.cols()) throw AssemblyError("inequality contribution dimension mismatch");
  MatX g(G.rows() + rows.rows(), G.cols());
  g << G, rows;
  VecX hh(h.size() + rhs.size());
  hh << h, rhs;
  G = std::move(g);
  h = std::move(hh);
}

void IneqSet::append(const IneqSet& other) {
  if (other.G.cols() != G.cols() || other.lo.size() != lo.size()) {
    throw AssemblyError("inequality contribution dimension mismatch");
  }
  append_linear(other.G, other.h);
  nonlinear.insert(nonlinear.end(), other.nonlinear.begin(), other.nonlinear.end());
  lo = lo.cwiseMax(other.lo);
  hi = hi.cwiseMin(other.hi);
}

void RobotParams::validate() const {
  if (!(mass > 0)) throw AssemblyError("robot mass must be positive");
  if (!(mu > 0 && mu <= 1.5)) throw AssemblyError("friction coefficient must lie in (0, 1.5]");
  if (!(gravity > 0)) throw AssemblyError("gravity magnitude must be positive");
  if (!(rotation.transpose() * rotation).isApprox(Mat3::Identity(), 1e-9)) {
    throw AssemblyError("body rotation must be orthonormal");
  }
}

int SplineSchedule::force_index(double t) const {
  if (force.empty()) return -1;
  for (std::size_t j = 0; j + 1 < force.size(); ++j) {
    if (t < force[j].tf) return static_cast<int>(j);
  }
  return static_cast<int>(force.size()) - 1;
}

MatX motion_selector(const DecisionLayout& L, const SplineSchedule& s, int i, double t, int deriv) {
  MatX sel = MatX::Zero(3, L.size());
  const Vec6 row = basis_row(t - s.motion[static_cast<std::size_t>(i)].t0, deriv);
  for (int axis = 0; axis < 3; ++axis) sel.block<1, 6>(axis, L.motion_offset(i, axis)) = row.transpose();
  return sel;
}

MatX force_selector(const DecisionLayout& L, const SplineSchedule& s, int j, double t, int deriv) {
  MatX sel = MatX::Zero(3, L.size());
  const Vec6 row = basis_row(t - s.force[static_cast<std::size_t>(j)].t0, deriv);
  for (int axis = 0; axis < 3; ++axis) sel.block<1, 6>(axis, L.force_offset(j, axis)) = row.transpose();
  return sel;
}

QuadCost task_tracking_cost(const SplineSchedule& s, const DesiredMotion& motion, const DesiredForce& force,
                            const CostWeights& w) {
  const DecisionLayout L = s.layout();
  QuadCost cost = QuadCost::zero(L.size());
  for (int i = 0; i < L.n_motion; ++i) {
    const double t0 = s.motion[static_cast<std::size_t>(i)].t0;
    for (double t : sample_times(s.motion[static_cast<std::size_t>(i)])) {
      add_motion_terms(cost, L, i, t - t0, 0, motion.position(t), w.track_value);
      add_motion_terms(cost, L, i, t - t0, 1, motion.velocity, w.track_rate);
      add_motion_terms(cost, L, i, t - t0, 2, Vec3::Zero(), w.track_accel);
    }
  }
  for (int j = 0; j < L.n_force; ++j) {
    const double t0 = s.force[static_cast<std::size_t>(j)].t0;
    for (double t : sample_times(s.force[static_cast<std::size_t>(j)])) {
      const ForceSample d = force(j, t);
      add_force_terms(cost, L, j, t - t0, 0, d.value, w.track_value);
      add_force_terms(cost, L, j, t - t0, 1, d.rate, w.track_rate);
      add_force_terms(cost, L, j, t - t0, 2, d.accel, w.track_accel);
    }
  }
  return cost;
}

QuadCost deviation_cost(const SplineSchedule& s, const PiecewiseTrajectory& prev_motion,
                        const PiecewiseTrajectory& prev_force, double t_d, double weight) {
  const DecisionLayout L = s.layout();
  QuadCost cost = QuadCost::zero(L.size());
  if (weight == 0.0) return cost;
  for (int i = 0; i < L.n_motion; ++i) {
    const double t0 = s.motion[static_cast<std::size_t>(i)].t0;
    for (double t : sample_times(s.motion[static_cast<std::size_t>(i)])) {
      if (!in_domain(prev_motion, t + t_d)) continue;
      for (int k = 0; k <= 2; ++k) add_motion_terms(cost, L, i, t - t0, k, prev_motion.eval(t + t_d, k), weight);
    }
  }
  for (int j = 0; j < L.n_force; ++j) {
    const double t0 = s.force[static_cast<std::size_t>(j)].t0;
    for (double t : sample_times(s.force[static_cast<std::size_t>(j)])) {
      if (!in_domain(prev_force, t + t_d)) continue;
      for (int k = 0; k <= 2; ++k) add_force_terms(cost, L, j, t - t0, k, prev_force.eval(t + t_d, k), weight);
    }
  }
  return cost;
}

QuadCost initial_match_cost(const SplineSchedule& s, const Vec3& measured_accel, const Vec3& measured_force,
                            double weight) {
  const DecisionLayout L = s.layout();
  QuadCost cost = QuadCost::zero(L.size());
  if (L.n_motion > 0) add_motion_terms(cost, L, 0, 0.0, 2, measured_accel, weight);
  if (L.n_force > 0) add_force_terms(cost, L, 0, 0.0, 0, measured_force, weight);
  return cost;
}

QuadCost min_accel_cost(const SplineSchedule& s, double weight) {
  const DecisionLayout L = s.layout();
  QuadCost cost = QuadCost::zero(L.size());
  if (weight == 0.0) return cost;
  for (int i = 0; i < L.n_motion; ++i) {
    const Mat6 gram = accel_gram({0.0, s.motion[static_cast<std::size_t>(i)].duration()});
    for (int axis = 0; axis < 3; ++axis) {
      const int off = L.motion_offset(i, axis);
      cost.Q.block<6, 6>(off, off) += 2.0 * weight * gram;
    }
  }
  return cost;
}

LinearEq junction_eqs(const SplineSchedule& s) {
  const DecisionLayout L = s.layout();
  const int junctions = std::max(0, L.n_motion - 1);
  LinearEq eq{MatX::Zero(6 * junctions, L.size()), VecX::Zero(6 * junctions)};
  for (int i = 0; i < junctions; ++i) {
    const double dur = s.motion[static_cast<std::size_t>(i)].duration();
    for (int k = 0; k <= 1; ++k) {
      const Vec6 end_row = basis_row(dur, k);
      const Vec6 start_row = basis_row(0.0, k);
      for (int axis = 0; axis < 3; ++axis) {
        const int r = 6 * i + 3 * k + axis;
        eq.A.block<1, 6>(r, L.motion_offset(i, axis)) = end_row.transpose();
        eq.A.block<1, 6>(r, L.motion_offset(i + 1, axis)) = -start_row.transpose();
      }
    }
  }
  return eq;
}

LinearEq initial_point_eqs(const SplineSchedule& s, const Vec3& r0, const Vec3& v0) {
  const DecisionLayout L = s.layout();
  LinearEq eq{MatX::Zero(6, L.size()), VecX::Zero(6)};
  for (int k = 0; k <= 1; ++k) {
    const Vec6 row = basis_row(0.0, k);
    for (int axis = 0; axis < 3; ++axis) eq.A.block<1, 6>(3 * k + axis, L.motion_offset(0, axis)) = row.transpose();
  }
  eq.rhs << r0, v0;
  return eq;
}

LinearEq free_motion_eqs(const SplineSchedule& s, const std::vector<AxisMask>& free_per_spline) {
  const DecisionLayout L = s.layout();
  if (static_cast<int>(free_per_spline.size()) != L.n_force) {
    throw AssemblyError("free-motion masks must match the number of force splines");
  }
  int rows = 0;
  for (const auto& m : free_per_spline)
    for (bool f : m) rows += f ? 6 : 0;
  LinearEq eq{MatX::Zero(rows, L.size()), VecX::Zero(rows)};
  int r = 0;
  for (int j = 0; j < L.n_force; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      if (!free_per_spline[static_cast<std::size_t>(j)][static_cast<std::size_t>(axis)]) continue;
      eq.A.block<6, 6>(r, L.force_offset(j, axis)).setIdentity();
      r += 6;
    }
  }
  return eq;
}

LinearEq freeze_force_eqs(const SplineSchedule& s, const DesiredForce& force) {
  const DecisionLayout L = s.layout();
  const int rows = kCoeffsPerSpline * L.n_force;
  LinearEq eq{MatX::Zero(rows, L.size()), VecX::Zero(rows)};
  for (int j = 0; j < L.n_force; ++j) {
    const ForceSample d = force(j, s.force[static_cast<std::size_t>(j)].t0);
    for (int axis = 0; axis < 3; ++axis) {
      const int r = kCoeffsPerSpline * j + kCoeffsPerAxis * axis;
      eq.A.block<6, 6>(r, L.force_offset(j, axis)).setIdentity();
      eq.rhs.segment<6>(r) << 0.0, 0.0, 0.0, 0.5 * d.accel(axis), d.rate(axis), d.value(axis);
    }
  }
  return eq;
}

Eigen::Vector4d friction_rows(const Vec3& a, const Vec3& f, const RobotParams& p) {
  const double m = p.mass;
  const double mu = p.mu;
  const double normal_part = -mu * m * a.z() + mu * f.z();
  const double rhs = mu * m * p.gravity;
  Eigen::Vector4d rows;
  rows << (m * a.x() - f.x()) + normal_part - rhs, -(m * a.x() - f.x()) + normal_part - rhs,
      (m * a.y() - f.y()) + normal_part - rhs, -(m * a.y() - f.y()) + normal_part - rhs;
  return rows;
}

IneqSet friction_pyramid_ineqs(const SplineSchedule& s, const RobotParams& p, bool include_force) {
  const DecisionLayout L = s.layout();
  IneqSet set = IneqSet::empty(L.size());
  const int samples = 6 * L.n_motion;
  MatX G = MatX::Zero(4 * samples, L.size());
  VecX h = VecX::Constant(4 * samples, p.mu * p.mass * p.gravity);
  int r = 0;
  for (int i = 0; i < L.n_motion; ++i) {
    for (double t : sample_times(s.motion[static_cast<std::size_t>(i)])) {
      const MatX A = p.mass * motion_selector(L, s, i, t, 2);
      MatX F = MatX::Zero(3, L.size());
      const int j = include_force ? s.force_index(t) : -1;
      if (j >= 0) F = force_selector(L, s, j, t, 0);
      // tangential ground force m a - f, normal ground force m (a_z + g) - f_z
      const MatX tx = A.row(0) - F.row(0);
      const MatX ty = A.row(1) - F.row(1);
      const MatX nz = -p.mu * (A.row(2) - F.row(2));
      G.row(r++) = tx + nz;
      G.row(r++) = -tx + nz;
      G.row(r++) = ty + nz;
      G.row(r++) = -ty + nz;
    }
  }
  set.append_linear(G, h);
  return set;
}

SupportWrench support_wrench(const Vec3& com, const Vec3& a, const Vec3& f, const Vec3& r_cm, const RobotParams& p) {
  const Vec3 g_vec(0.0, 0.0, -p.gravity);
  const Vec3 u = p.mass * (g_vec - a);            // gravito-inertial force
  const Vec3 tau = com.cross(u) + (com + p.rotation * r_cm).cross(f);
  return {-(u + f), -tau};
}

Vec3 zmp_point(const SupportWrench& w, const Vec3& normal) {
  return normal.cross(w.moment) / normal.dot(w.force);
}

ZmpResidual zmp_rows_unchecked(const VecX& x, const DecisionLayout& L, const SplineSchedule& s,
                               const ZmpSample& sample, const RobotParams& p, const Vec3& r_cm) {
  const MatX B0 = motion_selector(L, s, sample.motion_spline, sample.t, 0);
  const MatX B2 = motion_selector(L, s, sample.motion_spline, sample.t, 2);
  MatX Bf = MatX::Zero(3, L.size());
  if (sample.force_spline >= 0) Bf = force_selector(L, s, sample.force_spline, sample.t, 0);

  const Vec3 q = B0 * x;
  const Vec3 a = B2 * x;
  const Vec3 f = Bf * x;
  const Vec3 lever = q + p.rotation * r_cm;
  const SupportWrench w = support_wrench(q, a, f, r_cm, p);
  const Vec3 u = p.mass * (Vec3(0, 0, -p.gravity) - a);

  // T = -(q x u) - (lever x f), u = m (g - a), F = -(u + f)
  const MatX dT = p.mass * skew(q) * B2 + skew(u) * B0 - skew(lever) * Bf + skew(f) * B0;
  const MatX dF = p.mass * B2 - Bf;

  const Vec3& n = sample.normal;
  const Vec3 nxT = n.cross(w.moment);
  const double nF = n.dot(w.force);
  const MatX dnxT = skew(n) * dT;
  const Eigen::RowVectorXd dnF = n.transpose() * dF;

  const int k = static_cast<int>(sample.halfspaces.size());
  ZmpResidual res{VecX(k), MatX(k, L.size()), nF};
  for (int e = 0; e < k; ++e) {
    const HalfSpace& hs = sample.halfspaces[static_cast<std::size_t>(e)];
    res.value(e) = hs.a * nxT.x() + hs.b * nxT.y() + hs.c * nF;
    res.jacobian.row(e) = hs.a * dnxT.row(0) + hs.b * dnxT.row(1) + hs.c * dnF;
  }
  return res;
}

ZmpResidual zmp_residual(const VecX& x, const DecisionLayout& L, const SplineSchedule& s, const ZmpSample& sample,
                         const RobotParams& p, const Vec3& r_cm, double min_normal_force) {
  ZmpResidual res = zmp_rows_unchecked(x, L, s, sample, p, r_cm);
  if (res.normal_force <= min_normal_force) {
    std::ostringstream msg;
    msg << "support force " << res.normal_force << " N at t=" << sample.t << " below validity threshold "
        << min_normal_force << " N";
    throw ZmpInvalidError(msg.str());
  }
  return res;
}

std::vector<ZmpSample> zmp_samples(const SplineSchedule& s, const SupportSequence& support, bool include_force) {
  if (support.polygons.size() != s.motion.size()) {
    throw AssemblyError("one support polygon per motion spline is required");
  }
  std::vector<ZmpSample> out;
  for (std::size_t i = 0; i < s.motion.size(); ++i) {
    for (double t : sample_times(s.motion[i])) {
      ZmpSample z;
      z.motion_spline = static_cast<int>(i);
      z.force_spline = include_force ? s.force_index(t) : -1;
      z.t = t;
      z.halfspaces = support.polygons[i].halfspaces;
      z.normal = support.polygons[i].normal;
      out.push_back(std::move(z));
    }
  }
  return out;
}

IneqSet zmp_ineqs(const SplineSchedule& s, const SupportSequence& support, const RobotParams& p, const Vec3& r_cm,
                  bool include_force) {
  const DecisionLayout L = s.layout();
  IneqSet set = IneqSet::empty(L.size());
  auto samples = std::make_shared<const std::vector<ZmpSample>>(zmp_samples(s, support, include_force));

  int rows = 0;
  for (const auto& z : *samples) rows += static_cast<int>(z.halfspaces.size());

  NonlinearIneq zmp;
  zmp.name = "zmp";
  zmp.rows = rows;
  zmp.eval = [samples, L, s, p, r_cm](const VecX& x, VecX& g, MatX* jac) {
    g.resize(0);
    int total = 0;
    for (const auto& z : *samples) total += static_cast<int>(z.halfspaces.size());
    g = VecX::Zero(total);
    if (jac) *jac = MatX::Zero(total, L.size());
    int r = 0;
    for (const auto& z : *samples) {
      const ZmpResidual res = zmp_rows_unchecked(x, L, s, z, p, r_cm);
      const int k = static_cast<int>(res.value.size());
      g.segment(r, k) = res.value;
      if (jac) jac->middleRows(r, k) = res.jacobian;
      r += k;
    }
  };
  set.nonlinear.push_back(std::move(zmp));

  // n.F >= eps keeps the multiplied-through rows equivalent to the ZMP test
  const double eps = 0.1 * p.mass * p.gravity;
  MatX G(samples->size(), L.size());
  VecX h(samples->size());
  for (std::size_t k = 0; k < samples->size(); ++k) {
    const ZmpSample& z = (*samples)[k];
    MatX dF = p.mass * motion_selector(L, s, z.motion_spline, z.t, 2);
    if (z.force_spline >= 0) dF -= force_selector(L, s, z.force_spline, z.t, 0);
    G.row(static_cast<Eigen::Index>(k)) = -(z.normal.transpose() * dF);
    h(static_cast<Eigen::Index>(k)) = -eps + p.mass * p.gravity * z.normal.z();
  }
  set.append_linear(G, h);
  return set;
}

IneqSet force_limit_ineqs(const SplineSchedule& s, const ManipContact& c,
                          const std::vector<AxisMask>& free_per_spline) {
  const DecisionLayout L = s.layout();
  IneqSet set = IneqSet::empty(L.size());
  if (static_cast<int>(free_per_spline.size()) != L.n_force) {
    throw AssemblyError("free-motion masks must match the number of force splines");
  }
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  const int d = static_cast<int>(c.jacobian.cols());
  for (int j = 0; j < L.n_force; ++j) {
    const AxisMask& fm = free_per_spline[static_cast<std::size_t>(j)];
    const bool all_free = fm[0] && fm[1] && fm[2];
    for (double t : sample_times(s.force[static_cast<std::size_t>(j)])) {
      const MatX Bf = force_selector(L, s, j, t, 0);
      if (!all_free) {
        const MatX torque = c.jacobian.transpose() * Bf;
        for (int k = 0; k < d; ++k) {
          rows.push_back(torque.row(k));
          rhs.push_back(c.tau_limit(k));
        }
      }
      for (int axis = 0; axis < 3; ++axis) {
        if (fm[static_cast<std::size_t>(axis)]) continue;
        if (std::isfinite(c.f_hi(axis))) {
          rows.push_back(Bf.row(axis));
          rhs.push_back(c.f_hi(axis));
        }
        if (std::isfinite(c.f_lo(axis))) {
          rows.push_back(-Bf.row(axis));
          rhs.push_back(-c.f_lo(axis));
        }
      }
    }
  }
  MatX G(static_cast<Eigen::Index>(rows.size()), L.size());
  VecX h(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    G.row(static_cast<Eigen::Index>(r)) = rows[r];
    h(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  set.append_linear(G, h);
  return set;
}

std::string PlannerProblem::dimension_report() const {
  std::ostringstream out;
  out << "variables=" << layout.size() << " (motion splines=" << layout.n_motion
      << ", force splines=" << layout.n_force << ") equalities=" << eq.rows()
      << " linear inequalities=" << ineq.linear_rows() << " nonlinear inequalities=" << ineq.nonlinear_rows();
  return out.str();
}

PlannerProblem assemble(const DecisionLayout& layout, const ProblemParts& parts) {
  const int n = layout.size();
  PlannerProblem prob{layout, QuadCost::zero(n), LinearEq::empty(n), IneqSet::empty(n)};
  for (const auto& c : parts.costs) {
    if (c.Q.rows() != n || c.Q.cols() != n || c.b.size() != n) throw AssemblyError("cost layout mismatch");
    prob.cost += c;
  }
  for (const auto& e : parts.equalities) {
    if (e.A.cols() != n) throw AssemblyError("equality layout mismatch");
    prob.eq.append(e);
  }
  for (const auto& i : parts.inequalities) {
    if (i.G.cols() != n || i.lo.size() != n) throw AssemblyError("inequality layout mismatch");
    prob.ineq.append(i);
  }
  return prob;
}

}  // namespace lmplan
