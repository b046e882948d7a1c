#pragma once

#include "lmplan/problem.hpp"
#include "lmplan/qp_solver.hpp"

#include <algorithm>
#include <vector>

namespace lmplan {

/// Evaluation of every constraint of a PlannerProblem at a point.
struct ConstraintEval {
  double max_eq = 0.0;          // max |A x - rhs|
  double max_linear = 0.0;      // max (G x - h)+
  double max_nonlinear = 0.0;   // max g(x)+
  double max_bound = 0.0;
  double l1 = 0.0;              // sum of all violations

  double max_violation() const { return std::max({max_eq, max_linear, max_nonlinear, max_bound}); }
};

ConstraintEval evaluate_constraints(const PlannerProblem& problem, const VecX& x);

/// Stacked nonlinear residuals and (optionally) Jacobian.
void eval_nonlinear(const PlannerProblem& problem, const VecX& x, VecX& g, MatX* jacobian);

struct NlpResult : SolveResult {
  int qp_iterations = 0;
  std::vector<double> merit_history;  // merit after each accepted step
};

/// SQP: linearize the nonlinear rows at the iterate, solve the QP with the
/// exact quadratic cost, and backtrack on an l1 merit function.
NlpResult solve_nlp(const PlannerProblem& problem, const VecX& x0, const SolverOptions& opts = {},
                    const std::vector<int>* warm_active_set = nullptr);

}  // namespace lmplan
