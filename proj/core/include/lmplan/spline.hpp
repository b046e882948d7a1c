#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace lmplan {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Raised for time arguments outside a trajectory's domain or degenerate domains.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of quintic coefficients per axis.
inline constexpr int kCoeffsPerAxis = 6;
/// Coefficients for one 3-axis spline (x, y, z blocks).
inline constexpr int kCoeffsPerSpline = 3 * kCoeffsPerAxis;

/// Closed time interval in seconds.
struct TimeDomain {
  double t0 = 0.0;
  double tf = 0.0;

  double duration() const { return tf - t0; }
  bool contains(double t) const { return t >= t0 && t <= tf; }
};

/// Quintic coefficients for one axis, ordered by descending degree
/// [c5, c4, c3, c2, c1, c0].
using AxisCoeffs = Vec6;

/// Monomial basis row (deriv = 0), or its first/second time derivative,
/// ordered to match AxisCoeffs.
Vec6 basis_row(double t, int deriv);

/// Three-axis quintic polynomial over a time domain. The polynomial argument
/// is piece-local: evaluating at absolute time t uses basis_row(t - domain.t0).
struct Spline3 {
  AxisCoeffs x = AxisCoeffs::Zero();
  AxisCoeffs y = AxisCoeffs::Zero();
  AxisCoeffs z = AxisCoeffs::Zero();
  TimeDomain domain;

  Vec3 eval(double t, int deriv) const;

  /// Stacked [x; y; z] coefficient vector (18 entries).
  Eigen::Matrix<double, kCoeffsPerSpline, 1> stacked() const;
  static Spline3 from_stacked(const Eigen::Ref<const VecX>& c, TimeDomain domain);
};

/// Contiguous sequence of Spline3 pieces. Boundary times resolve to the later
/// piece; the final piece's domain is closed.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  explicit PiecewiseTrajectory(std::vector<Spline3> pieces);

  const std::vector<Spline3>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double start_time() const;
  double end_time() const;

  /// Index of the piece owning time t; throws DomainError outside the domain.
  std::size_t piece_index(double t) const;
  Vec3 eval(double t, int deriv) const;

 private:
  std::vector<Spline3> pieces_;
};

/// Six evenly spaced sample times over [t0, tf], endpoints included.
std::array<double, 6> sample_times(TimeDomain domain);

/// Closed-form Gram matrix of the acceleration basis, integral of
/// basis_row(t,2) basis_row(t,2)^T over the domain.
Mat6 accel_gram(TimeDomain domain);

}  // namespace lmplan
