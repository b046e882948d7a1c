#pragma once
// Reference implementations used only by the tests. They are written
// independently of the library code and favour obviousness over speed.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

// Coefficients ordered highest power first: c[0] t^5 + ... + c[5].
inline double monomial(const Eigen::Matrix<double, 6, 1>& c, double t, int deriv) {
  double sum = 0.0;
  for (int k = 0; k < 6; ++k) {
    const int power = 5 - k;
    if (power < deriv) continue;
    double factor = 1.0;
    for (int d = 0; d < deriv; ++d) factor *= power - d;
    sum += c(k) * factor * std::pow(t, power - deriv);
  }
  return sum;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Winding number of a closed polygon around p (non-zero means inside).
inline int winding_number(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % n];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross > 0) ++wn;
    } else if (b.y() <= p.y() && cross < 0) {
      --wn;
    }
  }
  return wn;
}

// Capture-point style foothold: hip under the CoM at touchdown, advanced by
// half the stance travel, corrected by the velocity error.
inline Eigen::Vector2d lip_foothold(const Eigen::Vector2d& com, const Eigen::Vector2d& vel, const Eigen::Vector2d& hip,
                                    const Eigen::Vector2d& v_des, double height, double g, double t_td,
                                    double t_stance) {
  return com + hip + v_des * t_td + 0.5 * t_stance * v_des + std::sqrt(height / g) * (vel - v_des);
}

struct QpOracleResult {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
};

// min 0.5 x'Qx + b'x  s.t.  A x = r,  G x <= h, by trying every active set.
// Q must be positive definite.
inline std::optional<QpOracleResult> qp_by_enumeration(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b,
                                                       const Eigen::MatrixXd& A, const Eigen::VectorXd& r,
                                                       const Eigen::MatrixXd& G, const Eigen::VectorXd& h) {
  const int n = static_cast<int>(Q.rows());
  const int me = static_cast<int>(A.rows());
  const int mi = static_cast<int>(G.rows());
  std::optional<QpOracleResult> best;
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < mi; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int k = me + static_cast<int>(act.size());
    if (k > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = Q;
    rhs.head(n) = -b;
    for (int i = 0; i < me; ++i) {
      K.block(n + i, 0, 1, n) = A.row(i);
      K.block(0, n + i, n, 1) = A.row(i).transpose();
      rhs(n + i) = r(i);
    }
    for (std::size_t j = 0; j < act.size(); ++j) {
      const int row = n + me + static_cast<int>(j);
      K.block(row, 0, 1, n) = G.row(act[j]);
      K.block(0, row, n, 1) = G.row(act[j]).transpose();
      rhs(row) = h(act[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    bool ok = true;
    for (std::size_t j = 0; j < act.size(); ++j) ok = ok && sol(n + me + static_cast<int>(j)) >= -1e-9;
    if (mi > 0) ok = ok && ((G * x - h).array() <= 1e-9).all();
    if (!ok) continue;
    const double obj = 0.5 * x.dot(Q * x) + b.dot(x);
    if (!best || obj < best->objective) best = QpOracleResult{x, obj};
  }
  return best;
}

}  // namespace oracle
