#include "lmplan/qp_solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lmplan {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-14;

// Factorization state of the dual active-set method: J = L^-T Q_r with
// L^-1 N = Q_r [R; 0] for the active normals N.
struct ActiveFactor {
  MatrixXd J;
  MatrixXd R;
  int q = 0;
  double r_norm = 1.0;

  // d = J^T n for the entering constraint; rotates J so that d has zeros
  // below position q, then appends d to R.
  bool add(VectorXd& d) {
    const int n = static_cast<int>(J.rows());
    for (int j = n - 1; j > q; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h < kEps) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j - 1);
        const double t2 = J(k, j);
        J(k, j - 1) = t1 * cc + t2 * ss;
        J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
      }
    }
    ++q;
    R.col(q - 1).head(q) = d.head(q);
    if (std::abs(d(q - 1)) <= 1e-14 * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d(q - 1)));
    return true;
  }

  // Removes active position l, restoring triangularity of R by rotations.
  void drop(int l) {
    const int n = static_cast<int>(J.rows());
    for (int i = l; i < q - 1; ++i) R.col(i) = R.col(i + 1);
    R.col(q - 1).setZero();
    --q;
    for (int j = l; j < q; ++j) {
      double cc = R(j, j);
      double ss = R(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h < kEps) continue;
      cc /= h;
      ss /= h;
      R(j + 1, j) = 0.0;
      if (cc < 0) {
        R(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < q; ++k) {
        const double t1 = R(j, k);
        const double t2 = R(j + 1, k);
        R(j, k) = t1 * cc + t2 * ss;
        R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
      }
      for (int k = 0; k < n; ++k) {
        const double t1 = J(k, j);
        const double t2 = J(k, j + 1);
        J(k, j) = t1 * cc + t2 * ss;
        J(k, j + 1) = xny * (J(k, j) + t1) - t2;
      }
    }
  }
};

struct Step {
  VectorXd d;
  VectorXd z;
  VectorXd r;
  double d2_sq = 0.0;
};

Step compute_step(const ActiveFactor& f, const VectorXd& normal) {
  const int n = static_cast<int>(f.J.rows());
  Step s;
  s.d = f.J.transpose() * normal;
  s.z = f.J.rightCols(n - f.q) * s.d.tail(n - f.q);
  s.r = f.R.topLeftCorner(f.q, f.q).triangularView<Eigen::Upper>().solve(s.d.head(f.q));
  s.d2_sq = s.d.tail(n - f.q).squaredNorm();
  return s;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

SolveResult solve_qp(const QpProblem& p, const SolverOptions& opts, const std::vector<int>* warm) {
  const auto start = std::chrono::steady_clock::now();
  SolveResult res;
  auto finish = [&](SolveStatus status, std::string msg) {
    res.status = status;
    res.message = std::move(msg);
    res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  const int n = p.dimension();
  const int m_eq = static_cast<int>(p.A_eq.rows());
  const int m_g = static_cast<int>(p.G.rows());
  if (p.Q.cols() != n || p.b.size() != n || (m_eq > 0 && p.A_eq.cols() != n) || p.rhs_eq.size() != m_eq ||
      (m_g > 0 && p.G.cols() != n) || p.h.size() != m_g || (p.lo.size() != 0 && p.lo.size() != n) ||
      (p.hi.size() != 0 && p.hi.size() != n)) {
    throw std::invalid_argument("QP dimensions are inconsistent");
  }
  res.x = VectorXd::Zero(n);
  res.eq_multipliers = VectorXd::Zero(m_eq);
  res.ineq_multipliers = VectorXd::Zero(m_g);

  // Jacobi scaling x = D y
  VectorXd D(n);
  for (int i = 0; i < n; ++i) D(i) = p.Q(i, i) > kEps ? 1.0 / std::sqrt(p.Q(i, i)) : 1.0;
  MatrixXd Qs = D.asDiagonal() * p.Q * D.asDiagonal();
  const VectorXd bs = D.cwiseProduct(p.b);

  Eigen::LLT<MatrixXd> llt(Qs);
  double reg = 0.0;
  while (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-10) {
    reg = reg == 0.0 ? 1e-12 : reg * 100.0;
    if (reg > 1e-4) return finish(SolveStatus::kNumericalFailure, "Hessian is not positive definite");
    llt.compute(Qs + reg * MatrixXd::Identity(n, n));
  }

  // Equalities in scaled space, unit normals; dependent rows are dropped.
  std::vector<int> eq_rows;
  VectorXd eq_scale = VectorXd::Zero(m_eq);
  MatrixXd E(m_eq, n);
  VectorXd e_rhs(m_eq);
  for (int k = 0; k < m_eq; ++k) {
    const VectorXd a = p.A_eq.row(k).transpose().cwiseProduct(D);
    eq_scale(k) = a.norm();
    if (eq_scale(k) < kEps) {
      if (std::abs(p.rhs_eq(k)) > opts.constraint_tol) return finish(SolveStatus::kInfeasible, "zero equality row");
      E.row(k).setZero();
      e_rhs(k) = 0.0;
      continue;
    }
    E.row(k) = a.transpose() / eq_scale(k);
    e_rhs(k) = p.rhs_eq(k) / eq_scale(k);
  }
  if (m_eq > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(E.transpose());
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    std::vector<bool> keep(static_cast<std::size_t>(m_eq), false);
    for (int k = 0; k < rank; ++k) keep[static_cast<std::size_t>(qr.colsPermutation().indices()(k))] = true;
    for (int k = 0; k < m_eq; ++k) {
      if (keep[static_cast<std::size_t>(k)]) eq_rows.push_back(k);
    }
    res.dropped_eq_rows = m_eq - rank;
  }

  // Inequalities as unit normals c^T y >= c0.
  struct Row {
    int public_index;
    double scale;
    bool upper_bound;
  };
  std::vector<Row> rows;
  std::vector<VectorXd> normals;
  std::vector<double> rhs;
  std::vector<int> lookup(static_cast<std::size_t>(m_g + 2 * n), -1);
  for (int i = 0; i < m_g; ++i) {
    const VectorXd a = p.G.row(i).transpose().cwiseProduct(D);
    const double s = a.norm();
    if (s < kEps) {
      if (p.h(i) < -opts.constraint_tol) return finish(SolveStatus::kInfeasible, "zero inequality row is violated");
      continue;
    }
    lookup[static_cast<std::size_t>(i)] = static_cast<int>(rows.size());
    rows.push_back({i, s, false});
    normals.push_back(-a / s);
    rhs.push_back(-p.h(i) / s);
  }
  for (int i = 0; i < n; ++i) {
    if (p.hi.size() == n && std::isfinite(p.hi(i))) {
      lookup[static_cast<std::size_t>(m_g + 2 * i)] = static_cast<int>(rows.size());
      rows.push_back({m_g + 2 * i, D(i), true});
      normals.push_back(-VectorXd::Unit(n, i));
      rhs.push_back(-p.hi(i) / D(i));
    }
    if (p.lo.size() == n && std::isfinite(p.lo(i))) {
      lookup[static_cast<std::size_t>(m_g + 2 * i + 1)] = static_cast<int>(rows.size());
      rows.push_back({m_g + 2 * i + 1, D(i), false});
      normals.push_back(VectorXd::Unit(n, i));
      rhs.push_back(p.lo(i) / D(i));
    }
  }
  const int m_i = static_cast<int>(rows.size());
  MatrixXd C(m_i, n);
  VectorXd c0(m_i);
  for (int k = 0; k < m_i; ++k) {
    C.row(k) = normals[static_cast<std::size_t>(k)].transpose();
    c0(k) = rhs[static_cast<std::size_t>(k)];
  }

  ActiveFactor f;
  f.J = MatrixXd::Identity(n, n);
  llt.matrixU().solveInPlace(f.J);  // J = L^-T = U^-1
  f.R = MatrixXd::Zero(n, n);

  VectorXd y = -(f.J * (f.J.transpose() * bs));
  VectorXd u = VectorXd::Zero(n + 1);
  std::vector<int> active;  // >= 0: inequality row, < 0: -(1 + equality row)

  for (int k : eq_rows) {
    const VectorXd np = E.row(k).transpose();
    Step st = compute_step(f, np);
    const double t2 = st.d2_sq > kEps ? (e_rhs(k) - np.dot(y)) / st.d2_sq : 0.0;
    y += t2 * st.z;
    u.head(f.q) -= t2 * st.r;
    u(f.q) = t2;
    if (!f.add(st.d)) return finish(SolveStatus::kNumericalFailure, "dependent equality constraints");
    active.push_back(-(1 + k));
  }
  const int q_eq = f.q;
  for (int k = 0; k < m_eq; ++k) {
    if (eq_scale(k) < kEps) continue;
    if (std::abs(E.row(k).dot(y) - e_rhs(k)) * eq_scale(k) > std::max(opts.constraint_tol, 1e-9)) {
      return finish(SolveStatus::kInfeasible, "inconsistent equality constraints");
    }
  }

  std::vector<bool> is_active(static_cast<std::size_t>(m_i), false);
  std::vector<bool> in_warm(static_cast<std::size_t>(m_i), false);
  if (warm) {
    for (int w : *warm) {
      if (w >= 0 && w < static_cast<int>(lookup.size()) && lookup[static_cast<std::size_t>(w)] >= 0) {
        in_warm[static_cast<std::size_t>(lookup[static_cast<std::size_t>(w)])] = true;
      }
    }
  }
  auto violated = [&](int k, double s) { return s * rows[static_cast<std::size_t>(k)].scale < -0.1 * opts.constraint_tol; };

  int iterations = 0;
  bool done = false;
  while (!done) {
    const VectorXd s = C * y - c0;
    int pick = -1;
    double worst = 0.0;
    for (int pass = warm ? 0 : 1; pass < 2 && pick < 0; ++pass) {
      for (int k = 0; k < m_i; ++k) {
        if (is_active[static_cast<std::size_t>(k)]) continue;
        if (pass == 0 && !in_warm[static_cast<std::size_t>(k)]) continue;
        if (violated(k, s(k)) && (pick < 0 || s(k) < worst)) {
          pick = k;
          worst = s(k);
        }
      }
    }
    if (pick < 0) break;

    const VectorXd np = C.row(pick).transpose();
    double u_p = 0.0;
    while (true) {
      if (++iterations > opts.max_qp_iters) {
        res.x = D.cwiseProduct(y);
        res.iterations = iterations;
        return finish(SolveStatus::kMaxIter, "QP iteration limit reached");
      }
      Step st = compute_step(f, np);
      double t1 = kInf;
      int l = -1;
      for (int k = q_eq; k < f.q; ++k) {
        if (st.r(k) > kEps) {
          const double ratio = u(k) / st.r(k);
          if (ratio < t1) {
            t1 = ratio;
            l = k;
          }
        }
      }
      const double sp = np.dot(y) - c0(pick);
      const double t2 = st.d2_sq > 1e-22 ? std::max(-sp, 0.0) / st.d2_sq : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.x = D.cwiseProduct(y);
        res.iterations = iterations;
        return finish(SolveStatus::kInfeasible, "inequality constraints are infeasible");
      }
      if (!std::isfinite(t2)) {
        u.head(f.q) -= t * st.r;
        u_p += t;
      } else {
        y += t * st.z;
        u.head(f.q) -= t * st.r;
        u_p += t;
        if (t == t2) {
          u(f.q) = u_p;
          if (!f.add(st.d)) {
            res.x = D.cwiseProduct(y);
            res.iterations = iterations;
            return finish(SolveStatus::kNumericalFailure, "degenerate active set");
          }
          active.push_back(pick);
          is_active[static_cast<std::size_t>(pick)] = true;
          break;
        }
      }
      // partial step: constraint l leaves the active set
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(l)])] = false;
      active.erase(active.begin() + l);
      for (int k = l; k < f.q - 1; ++k) u(k) = u(k + 1);
      f.drop(l);
    }
  }

  res.x = D.cwiseProduct(y);
  res.iterations = iterations;

  // Multipliers in original scaling and KKT residual
  VectorXd grad = p.Q * res.x + p.b;
  VectorXd stationarity = grad;
  double complementarity = 0.0;
  for (int k = 0; k < f.q; ++k) {
    const int a = active[static_cast<std::size_t>(k)];
    if (a < 0) {
      const int e = -(a + 1);
      res.eq_multipliers(e) = -u(k) / eq_scale(e);
      stationarity += res.eq_multipliers(e) * p.A_eq.row(e).transpose();
      continue;
    }
    const Row& row = rows[static_cast<std::size_t>(a)];
    const double lambda = u(k) / row.scale;
    res.active_set.push_back(row.public_index);
    if (row.public_index < m_g) {
      res.ineq_multipliers(row.public_index) = lambda;
      stationarity += lambda * p.G.row(row.public_index).transpose();
      complementarity = std::max(complementarity, std::abs(lambda * (p.G.row(row.public_index).dot(res.x) -
                                                                     p.h(row.public_index))));
    } else {
      const int var = (row.public_index - m_g) / 2;
      stationarity(var) += row.upper_bound ? lambda : -lambda;
    }
  }
  double primal = 0.0;
  if (m_eq > 0) primal = (p.A_eq * res.x - p.rhs_eq).cwiseAbs().maxCoeff();
  if (m_g > 0) primal = std::max(primal, (p.G * res.x - p.h).maxCoeff());
  for (int i = 0; i < n; ++i) {
    if (p.hi.size() == n) primal = std::max(primal, res.x(i) - p.hi(i));
    if (p.lo.size() == n) primal = std::max(primal, p.lo(i) - res.x(i));
  }
  const double grad_scale = 1.0 + std::max(grad.cwiseAbs().maxCoeff(), p.b.cwiseAbs().maxCoeff());
  const double stat = stationarity.cwiseAbs().maxCoeff() / grad_scale;
  res.kkt_residual = std::max({stat, std::max(primal, 0.0), complementarity / grad_scale});
  if (primal > opts.constraint_tol || stat > opts.kkt_tol) {
    return finish(SolveStatus::kNumericalFailure, "KKT conditions not met to tolerance");
  }
  return finish(SolveStatus::kOptimal, "");
}

}  // namespace lmplan
