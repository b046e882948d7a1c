#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lmplan {

/// min 0.5 x^T Q x + b^T x  s.t.  A_eq x = rhs_eq,  G x <= h,  lo <= x <= hi.
/// Empty G/A_eq are allowed; lo/hi may be empty (no bounds) or hold +-inf.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd rhs_eq;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dimension() const { return static_cast<int>(Q.rows()); }
};

enum class SolveStatus { kOptimal, kMaxIter, kInfeasible, kNumericalFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  int max_sqp_iters = 15;
  int max_qp_iters = 200;
  double constraint_tol = 1e-6;
  double kkt_tol = 1e-6;
  double backtrack = 0.5;
  double merit_penalty = 10.0;
  double step_tol = 1e-9;  // relative SQP step norm for convergence
};

struct SolveResult {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd x;
  int iterations = 0;
  double kkt_residual = 0.0;
  double solve_time = 0.0;  // seconds
  /// Active inequality rows: indices into G rows, then 2*i / 2*i+1 offsets
  /// past G for upper / lower bounds of variable i.
  std::vector<int> active_set;
  Eigen::VectorXd eq_multipliers;    // one per A_eq row (dropped rows get 0)
  Eigen::VectorXd ineq_multipliers;  // one per G row (>= 0)
  int dropped_eq_rows = 0;
  std::string message;
};

/// Dense dual active-set (Goldfarb-Idnani) QP solve. The warm active set
/// biases which violated constraints enter first; it never changes the optimum.
SolveResult solve_qp(const QpProblem& p, const SolverOptions& opts = {},
                     const std::vector<int>* warm_active_set = nullptr);

}  // namespace lmplan
