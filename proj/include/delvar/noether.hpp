#pragma once

#include <cstdint>
#include <optional>

#include "delvar/problem.hpp"

namespace delvar {

/// Integrands of the necessary condition of invariance, one per validity
/// interval. Invariance of the functional forces both to vanish identically
/// in (t, q, dq, delayed values).
struct InvarianceIntegrands {
  Expr inner;
  Expr outer;
};

InvarianceIntegrands invariance_integrands(const DelayedVariationalProblem& p, const GeneratorSet& g);

/// Control-problem analogue, obtained by applying the variational condition
/// to the augmented integrand H - p.q'. Requires eta and xi free of control
/// symbols (their total time derivative would otherwise need du/dt, which the
/// symbol algebra does not carry); rho and sigma may depend on (t, q, u).
InvarianceIntegrands invariance_integrands(const OptimalControlDelayProblem& p, const GeneratorSet& g);

enum class Verdict { invariant, not_invariant, inconclusive };

struct InvarianceConfig {
  int samples = 200;
  double tolerance = 1e-9;  // absolute, on integrand values
  std::uint64_t seed = 42;
};

struct IntervalInvariance {
  bool symbolic_zero = false;
  std::optional<double> sampled_max;  // absent when the symbolic route decided
};

struct InvarianceReport {
  IntervalInvariance inner;
  IntervalInvariance outer;
  int samples = 0;
  Verdict verdict = Verdict::inconclusive;
};

/// Symbolic check first (simplify to the literal 0 per interval); otherwise
/// deterministic pseudo-random sampling of all symbols in [-2, 2].
/// Invariant: symbolic zero or all samples within tolerance on both
/// intervals. NotInvariant: some sample exceeds 10x tolerance.
InvarianceReport check_invariance(const DelayedVariationalProblem& p, const GeneratorSet& g,
                                  const InvarianceConfig& cfg = {});
InvarianceReport check_invariance(const OptimalControlDelayProblem& p, const GeneratorSet& g,
                                  const InvarianceConfig& cfg = {});

/// Noether constant of motion in Lagrangian form; piecewise between the two
/// validity intervals.
PiecewiseCharge noether_charge(const DelayedVariationalProblem& p, const GeneratorSet& g);

/// Noether constant of motion in Hamiltonian form: -p.xi + H*eta, a single
/// expression valid on all of [t1, t2].
Expr noether_charge_oc(const OptimalControlDelayProblem& p, const GeneratorSet& g);

const char* verdict_name(Verdict v);

}  // namespace delvar
