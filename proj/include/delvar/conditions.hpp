#pragma once

#include "delvar/problem.hpp"

namespace delvar {

/// Residual systems on the two validity intervals. A residual is satisfied
/// when it evaluates to zero: conventions are theorem-LHS minus theorem-RHS.
/// Inner residuals (valid on [t1, t2 - tau]) may reference offsets {-1,0,+1};
/// outer residuals (valid on [t2 - tau, t2]) only {-1,0}.
struct TwoIntervalSystem {
  std::vector<Expr> inner;
  std::vector<Expr> outer;
};

/// Delayed Euler-Lagrange system: per component, on the inner interval
///   d/dt{ dL/ddq_i + [dL/ddq_i_tau shifted to t+tau] }
///     - ( dL/dq_i + [dL/dq_i_tau shifted to t+tau] ) = 0
/// and the classical-form condition on the outer interval.
TwoIntervalSystem euler_lagrange(const DelayedVariationalProblem& p);

/// Delayed DuBois-Reymond condition:
///   d/dt{ L - sum_i dq_i * (combined momentum_i) } - dL/dt = 0
/// with the momentum combining the advanced delayed partial on the inner
/// interval only.
TwoIntervalSystem dubois_reymond(const DelayedVariationalProblem& p);

/// H = L + sum_i p_i * phi_i over {t, q, u, q_tau, u_tau, p}.
Expr hamiltonian(const OptimalControlDelayProblem& p);

struct PontryaginBranch {
  std::vector<Expr> state;       // dq_i - dH/dp_i
  std::vector<Expr> costate;     // dp_i + dH/dq_i (+ shifted delayed partial inside)
  std::vector<Expr> stationary;  // dH/du_j (+ shifted delayed partial inside)
};

/// Hamiltonian system and stationary conditions on both intervals. The dp_i
/// symbols are introduced here and are bound by finite differences of p(t)
/// during verification; these residuals are checked numerically, never fed
/// back into total_time_derivative.
struct PontryaginSystem {
  PontryaginBranch inner;
  PontryaginBranch outer;
};

PontryaginSystem pontryagin_system(const OptimalControlDelayProblem& p);

/// The pair (H, dH/dt-partial) for the numeric check that d/dt H equals the
/// explicit time partial along Pontryagin extremals.
struct HamiltonianTimePair {
  Expr hamiltonian;
  Expr time_partial;
};

HamiltonianTimePair dH_dt_residual(const OptimalControlDelayProblem& p);

}  // namespace delvar
