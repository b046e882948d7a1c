#include "lmplan/spline.hpp"

#include <cmath>
#include <string>

namespace lmplan {

Vec6 basis_row(double t, int deriv) {
  Vec6 row = Vec6::Zero();
  // Column i holds the monomial of degree 5 - i.
  for (int i = 0; i < kCoeffsPerAxis; ++i) {
    const int degree = 5 - i;
    if (degree < deriv) continue;
    double factor = 1.0;
    for (int k = 0; k < deriv; ++k) factor *= static_cast<double>(degree - k);
    row(i) = factor * std::pow(t, degree - deriv);
  }
  return row;
}

Vec3 Spline3::eval(double t, int deriv) const {
  const Vec6 row = basis_row(t - domain.t0, deriv);
  return {row.dot(x), row.dot(y), row.dot(z)};
}

Eigen::Matrix<double, kCoeffsPerSpline, 1> Spline3::stacked() const {
  Eigen::Matrix<double, kCoeffsPerSpline, 1> c;
  c << x, y, z;
  return c;
}

Spline3 Spline3::from_stacked(const Eigen::Ref<const VecX>& c, TimeDomain domain) {
  Spline3 s;
  s.x = c.segment<6>(0);
  s.y = c.segment<6>(6);
  s.z = c.segment<6>(12);
  s.domain = domain;
  return s;
}

PiecewiseTrajectory::PiecewiseTrajectory(std::vector<Spline3> pieces) : pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& d = pieces_[i].domain;
    if (!(d.t0 <= d.tf)) throw DomainError("spline piece has t0 > tf");
    if (i > 0 && std::abs(pieces_[i - 1].domain.tf - d.t0) > 1e-12) {
      throw DomainError("trajectory pieces are not contiguous at piece " + std::to_string(i));
    }
  }
}

double PiecewiseTrajectory::start_time() const {
  if (pieces_.empty()) throw DomainError("empty trajectory");
  return pieces_.front().domain.t0;
}

double PiecewiseTrajectory::end_time() const {
  if (pieces_.empty()) throw DomainError("empty trajectory");
  return pieces_.back().domain.tf;
}

std::size_t PiecewiseTrajectory::piece_index(double t) const {
  if (pieces_.empty() || !std::isfinite(t) || t < start_time() || t > end_time()) {
    throw DomainError("time " + std::to_string(t) + " outside trajectory domain");
  }
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (t < pieces_[i].domain.tf) return i;
  }
  return pieces_.size() - 1;
}

Vec3 PiecewiseTrajectory::eval(double t, int deriv) const {
  return pieces_[piece_index(t)].eval(t, deriv);
}

std::array<double, 6> sample_times(TimeDomain domain) {
  if (!(domain.tf > domain.t0)) throw DomainError("degenerate sampling domain");
  const double h = domain.duration() / 5.0;
  std::array<double, 6> ts{};
  for (int i = 0; i < 6; ++i) ts[static_cast<std::size_t>(i)] = domain.t0 + h * i;
  ts[5] = domain.tf;
  return ts;
}

Mat6 accel_gram(TimeDomain domain) {
  if (!(domain.tf > domain.t0)) throw DomainError("degenerate integration domain");
  Mat6 q = Mat6::Zero();
  for (int i = 0; i < 4; ++i) {
    const int p = 5 - i;
    for (int j = 0; j < 4; ++j) {
      const int r = 5 - j;
      const int power = p + r - 3;  // integral of t^(p+r-4)
      const double coef = static_cast<double>(p * (p - 1) * r * (r - 1)) / power;
      q(i, j) = coef * (std::pow(domain.tf, power) - std::pow(domain.t0, power));
    }
  }
  return q;
}

}  // namespace lmplan
