#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delvar/expr.hpp"

namespace delvar {

/// One piece of a piecewise-smooth prehistory function: an expression in t
/// valid on [lo, hi].
struct PrehistoryPiece {
  double lo = 0.0;
  double hi = 0.0;
  Expr value;
};

/// Vector-valued prehistory delta on [t1 - tau, t1]; pieces per component,
/// ordered, covering the interval exactly. At an interior junction the right
/// piece wins (right-continuity).
struct Prehistory {
  std::vector<std::vector<PrehistoryPiece>> components;
};

/// Value of the prehistory at t in [t1 - tau, t1]; throws outside the domain.
std::vector<double> prehistory_eval(const Prehistory& pre, double t);

/// d^order/dt^order of the prehistory at t, computed analytically per piece
/// (order 0, 1 or 2). Same junction tie-break as prehistory_eval.
std::vector<double> prehistory_derivative(const Prehistory& pre, double t, int order);

struct DelayedVariationalProblem {
  int n = 1;
  Expr lagrangian;  // over t, q_i, dq_i, q_i_tau, dq_i_tau
  double tau = 1.0;
  double t1 = 0.0;
  double t2 = 1.0;
  Prehistory prehistory;
  std::optional<std::vector<double>> terminal;  // q(t2); absent = free endpoint
};

struct OptimalControlDelayProblem {
  int n = 1;
  int m = 1;
  Expr cost;                  // over t, q_i, u_j, q_i_tau, u_j_tau
  std::vector<Expr> dynamics; // n expressions over the same symbols
  double tau = 1.0;
  double t1 = 0.0;
  double t2 = 1.0;
  Prehistory prehistory;
};

/// Infinitesimal generators of a one-parameter transformation group. For
/// variational problems only eta (time direction) and xi (state directions)
/// are present; control problems may add rho (control) and sigma (costate).
/// Generators take undelayed arguments only.
struct GeneratorSet {
  Expr eta;
  std::vector<Expr> xi;
  std::optional<std::vector<Expr>> rho;
  std::optional<std::vector<Expr>> sigma;
};

/// Piecewise constant of motion: `inner` is valid on [t1, t2 - tau] and may
/// reference offsets {-1, 0, +1}; `outer` is valid on [t2 - tau, t2] with
/// offsets {-1, 0} only.
struct PiecewiseCharge {
  Expr inner;
  Expr outer;
};

struct Violation {
  std::string field;
  std::string rule;
  std::string message;
};

std::vector<Violation> validate(const DelayedVariationalProblem& p);
std::vector<Violation> validate(const OptimalControlDelayProblem& p);

/// Generator well-formedness against a problem (dimensions, allowed symbols,
/// undelayed arguments, rho/sigma presence).
std::vector<Violation> validate_generators(const GeneratorSet& g, const DelayedVariationalProblem& p);
std::vector<Violation> validate_generators(const GeneratorSet& g, const OptimalControlDelayProblem& p);

/// Throws ValidationError listing all violations; no-op when the list is empty.
void require_valid(const std::vector<Violation>& violations);

}  // namespace delvar
