#include "lmplan/sqp.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lmplan {

void eval_nonlinear(const PlannerProblem& problem, const VecX& x, VecX& g, MatX* jacobian) {
  const int rows = problem.ineq.nonlinear_rows();
  g = VecX::Zero(rows);
  if (jacobian) *jacobian = MatX::Zero(rows, problem.dimension());
  int r = 0;
  for (const auto& c : problem.ineq.nonlinear) {
    VecX gi;
    MatX Ji;
    c.eval(x, gi, jacobian ? &Ji : nullptr);
    g.segment(r, c.rows) = gi;
    if (jacobian) jacobian->middleRows(r, c.rows) = Ji;
    r += c.rows;
  }
}

ConstraintEval evaluate_constraints(const PlannerProblem& problem, const VecX& x) {
  ConstraintEval e;
  if (problem.eq.rows() > 0) {
    const VecX r = problem.eq.residual(x).cwiseAbs();
    e.max_eq = r.maxCoeff();
    e.l1 += r.sum();
  }
  if (problem.ineq.linear_rows() > 0) {
    const VecX r = (problem.ineq.G * x - problem.ineq.h).cwiseMax(0.0);
    e.max_linear = r.maxCoeff();
    e.l1 += r.sum();
  }
  if (problem.ineq.nonlinear_rows() > 0) {
    VecX g;
    eval_nonlinear(problem, x, g, nullptr);
    const VecX r = g.cwiseMax(0.0);
    e.max_nonlinear = r.maxCoeff();
    e.l1 += r.sum();
  }
  if (problem.ineq.lo.size() == x.size()) {
    const VecX r = (problem.ineq.lo - x).cwiseMax(0.0) + (x - problem.ineq.hi).cwiseMax(0.0);
    e.max_bound = r.maxCoeff();
    e.l1 += r.sum();
  }
  return e;
}

namespace {

QpProblem base_qp(const PlannerProblem& problem) {
  QpProblem qp;
  qp.Q = problem.cost.Q;
  qp.b = problem.cost.b;
  qp.A_eq = problem.eq.A;
  qp.rhs_eq = problem.eq.rhs;
  qp.lo = problem.ineq.lo;
  qp.hi = problem.ineq.hi;
  return qp;
}

}  // namespace

NlpResult solve_nlp(const PlannerProblem& problem, const VecX& x0, const SolverOptions& opts,
                    const std::vector<int>* warm_active_set) {
  const auto start = std::chrono::steady_clock::now();
  NlpResult out;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const int n = problem.dimension();
  if (x0.size() != n || !x0.allFinite()) throw std::invalid_argument("initial guess must be finite with matching size");
  const int m_lin = problem.ineq.linear_rows();
  const int m_nl = problem.ineq.nonlinear_rows();

  QpProblem qp = base_qp(problem);
  if (m_nl == 0) {
    qp.G = problem.ineq.G;
    qp.h = problem.ineq.h;
    SolveResult r = solve_qp(qp, opts, warm_active_set);
    static_cast<SolveResult&>(out) = r;
    out.qp_iterations = r.iterations;
    out.iterations = 1;
    out.solve_time = elapsed();
    return out;
  }

  qp.G.resize(m_lin + m_nl, n);
  qp.h.resize(m_lin + m_nl);
  qp.G.topRows(m_lin) = problem.ineq.G;
  qp.h.head(m_lin) = problem.ineq.h;

  double rho = opts.merit_penalty;
  auto merit = [&](const VecX& x) { return problem.cost.value(x) + rho * evaluate_constraints(problem, x).l1; };

  VecX x = x0;
  std::vector<int> warm;
  if (warm_active_set) warm = *warm_active_set;
  VecX g;
  MatX Jg;
  SolveResult last_qp;
  SolveStatus status = SolveStatus::kMaxIter;
  std::string message = "SQP iteration limit reached";

  for (int k = 0; k < opts.max_sqp_iters; ++k) {
    out.iterations = k + 1;
    eval_nonlinear(problem, x, g, &Jg);
    qp.G.bottomRows(m_nl) = Jg;
    qp.h.tail(m_nl) = Jg * x - g;
    last_qp = solve_qp(qp, opts, warm.empty() ? nullptr : &warm);
    out.qp_iterations += last_qp.iterations;
    if (last_qp.status == SolveStatus::kInfeasible) {
      // elastic retry: allow the linearized rows to keep their current violation
      QpProblem relaxed = qp;
      relaxed.h.tail(m_nl) += g.cwiseMax(0.0);
      last_qp = solve_qp(relaxed, opts, nullptr);
      out.qp_iterations += last_qp.iterations;
      if (last_qp.status != SolveStatus::kOptimal) {
        status = SolveStatus::kInfeasible;
        message = "QP subproblem infeasible after relaxation";
        break;
      }
    } else if (last_qp.status != SolveStatus::kOptimal) {
      status = last_qp.status;
      message = "QP subproblem failed: " + last_qp.message;
      break;
    }
    warm = last_qp.active_set;

    const VecX step = last_qp.x - x;
    double max_mult = 0.0;
    if (last_qp.eq_multipliers.size() > 0) max_mult = last_qp.eq_multipliers.cwiseAbs().maxCoeff();
    if (last_qp.ineq_multipliers.size() > 0) max_mult = std::max(max_mult, last_qp.ineq_multipliers.maxCoeff());
    rho = std::max(rho, 1.1 * max_mult);

    const ConstraintEval here = evaluate_constraints(problem, x);
    // the subproblem returns the current iterate: it is already a KKT point
    if (step.cwiseAbs().maxCoeff() <= opts.step_tol * (1.0 + x.cwiseAbs().maxCoeff()) &&
        here.max_violation() <= opts.constraint_tol) {
      out.kkt_residual = std::max(last_qp.kkt_residual, here.max_violation());
      out.merit_history.push_back(problem.cost.value(x) + rho * here.l1);
      status = SolveStatus::kOptimal;
      message.clear();
      break;
    }
    const double phi0 = problem.cost.value(x) + rho * here.l1;
    const VecX grad = problem.cost.Q * x + problem.cost.b;
    const double slope = grad.dot(step) - rho * here.l1;
    double alpha = 1.0;
    VecX trial = x + step;
    double phi = merit(trial);
    const double roundoff = 1e-12 * (1.0 + std::abs(phi0));
    while (phi > phi0 + 1e-4 * alpha * std::min(slope, 0.0) + roundoff && alpha > 1e-8) {
      alpha *= opts.backtrack;
      trial = x + alpha * step;
      phi = merit(trial);
    }
    x = trial;
    out.merit_history.push_back(phi);

    // KKT at the new iterate: QP stationarity plus the change in the linearization
    VecX g_new;
    MatX J_new;
    eval_nonlinear(problem, x, g_new, &J_new);
    const ConstraintEval now = evaluate_constraints(problem, x);
    const VecX grad_new = problem.cost.Q * x + problem.cost.b;
    const double scale = 1.0 + std::max(grad_new.cwiseAbs().maxCoeff(), problem.cost.b.cwiseAbs().maxCoeff());
    VecX drift = (J_new - Jg).transpose() * last_qp.ineq_multipliers.tail(m_nl);
    if (alpha < 1.0) drift += problem.cost.Q * (x - last_qp.x);
    const double stationarity = drift.cwiseAbs().maxCoeff() / scale + last_qp.kkt_residual;
    out.kkt_residual = std::max(stationarity, now.max_violation());

    const double step_norm = (alpha * step).cwiseAbs().maxCoeff();
    if (alpha == 1.0 && now.max_violation() <= opts.constraint_tol &&
        (stationarity <= opts.kkt_tol ||
         step_norm <= opts.step_tol * (1.0 + x.cwiseAbs().maxCoeff()))) {
      status = SolveStatus::kOptimal;
      message.clear();
      break;
    }
  }

  out.status = status;
  out.message = message;
  out.x = x;
  out.active_set = last_qp.active_set;
  out.eq_multipliers = last_qp.eq_multipliers;
  out.ineq_multipliers = last_qp.ineq_multipliers;
  out.solve_time = elapsed();
  return out;
}

}  // namespace lmplan
