#pragma once

#include "delvar/trajectory.hpp"

namespace delvar {

struct SolverConfig {
  double h = 0.01;
  double gtol = 1e-10;
  int max_iter = 100;
};

/// Rectangle-rule discretization of the delayed action with forward
/// differences for the velocities:
///   J(q) = h * sum_{i=k}^{k+steps-1} L(s_i, q_i, (q_{i+1}-q_i)/h,
///                                      q_{i-k}, (q_{i-k+1}-q_{i-k})/h).
/// Prehistory nodes are fixed from delta; the endpoint is fixed when a
/// terminal value is present and free otherwise (discrete natural boundary
/// condition). The gradient is assembled from cached symbolic partials of L;
/// the Hessian is assembled from symbolic second partials when L is
/// polynomial of degree <= 4 and from central differences of the gradient
/// otherwise.
class DiscretizedObjective {
 public:
  DiscretizedObjective(const DelayedVariationalProblem& p, double h);

  const DelayedVariationalProblem& problem() const { return problem_; }
  const Grid& grid() const { return grid_; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }
  bool analytic_hessian() const { return analytic_hessian_; }

  /// Number of free scalar variables (free nodes times state dimension).
  int dimension() const { return static_cast<int>(free_nodes_.size()) * problem_.n; }

  std::vector<double> initial_guess() const;

  double objective(const std::vector<double>& x) const;
  std::vector<double> gradient(const std::vector<double>& x) const;
  /// Dense row-major dimension() x dimension() matrix.
  std::vector<double> hessian(const std::vector<double>& x) const;

  Trajectory to_trajectory(const std::vector<double>& x) const;

 private:
  std::vector<double> full_values(const std::vector<double>& x) const;
  void node_binding(const std::vector<double>& q, int node, Binding& b) const;

  DelayedVariationalProblem problem_;
  Grid grid_;
  std::vector<int> free_nodes_;          // node indices, ascending
  std::vector<int> var_of_node_;         // node -> first scalar var index, -1 if fixed
  std::vector<double> fixed_values_;     // prehistory + terminal values on the full grid
  std::vector<Symbol> slots_;            // q_i, dq_i, q_i_tau, dq_i_tau
  std::vector<Expr> first_partials_;     // dL/dslot
  std::vector<std::vector<Expr>> second_partials_;  // upper triangle when analytic
  bool analytic_hessian_ = false;
};

DiscretizedObjective discretize(const DelayedVariationalProblem& p, double h);

struct SolveReport {
  Trajectory trajectory;
  double objective = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton with a Levenberg shift (doubled until the factorization
/// succeeds and the step descends), falling back to Armijo gradient descent
/// when the shifted system stays unusable. Deterministic: the initial guess
/// interpolates linearly from delta(t1) to the terminal value (constant when
/// the endpoint is free).
SolveReport solve(const DelayedVariationalProblem& p, const SolverConfig& cfg);

}  // namespace delvar
