#include "delvar/conditions.hpp"

namespace delvar {

namespace {

// dL/ddq_i + dL/ddq_i_tau advanced to t+tau: the momentum that is conserved
// across the delay coupling on the inner interval.
Expr combined_momentum(const Expr& lagrangian, int i, bool with_advanced) {
  Expr m = partial(lagrangian, Symbol::make(SymKind::state_dot, i, 0));
  if (with_advanced) {
    Expr delayed = partial(lagrangian, Symbol::make(SymKind::state_dot, i, -1));
    m = m + shift(delayed, +1);
  }
  return m;
}

Expr combined_state_partial(const Expr& lagrangian, int i, bool with_advanced) {
  Expr g = partial(lagrangian, Symbol::make(SymKind::state, i, 0));
  if (with_advanced) {
    Expr delayed = partial(lagrangian, Symbol::make(SymKind::state, i, -1));
    g = g + shift(delayed, +1);
  }
  return g;
}

}  // namespace

TwoIntervalSystem euler_lagrange(const DelayedVariationalProblem& p) {
  require_valid(validate(p));
  TwoIntervalSystem sys;
  sys.inner.reserve(p.n);
  sys.outer.reserve(p.n);
  for (int i = 1; i <= p.n; ++i) {
    Expr inner = total_time_derivative(combined_momentum(p.lagrangian, i, true)) -
                 combined_state_partial(p.lagrangian, i, true);
    Expr outer = total_time_derivative(combined_momentum(p.lagrangian, i, false)) -
                 combined_state_partial(p.lagrangian, i, false);
    sys.inner.push_back(simplify(inner));
    sys.outer.push_back(simplify(outer));
  }
  return sys;
}

TwoIntervalSystem dubois_reymond(const DelayedVariationalProblem& p) {
  require_valid(validate(p));
  Expr dt_partial = partial(p.lagrangian, Symbol::time());
  TwoIntervalSystem sys;
  for (bool advanced : {true, false}) {
    std::vector<Expr> carried;
    carried.push_back(p.lagrangian);
    for (int i = 1; i <= p.n; ++i) {
      carried.push_back(-(Expr::state_dot(i) * combined_momentum(p.lagrangian, i, advanced)));
    }
    Expr residual = total_time_derivative(Expr::sum(std::move(carried))) - dt_partial;
    (advanced ? sys.inner : sys.outer).push_back(simplify(residual));
  }
  return sys;
}

Expr hamiltonian(const OptimalControlDelayProblem& p) {
  require_valid(validate(p));
  std::vector<Expr> terms;
  terms.reserve(p.n + 1);
  terms.push_back(p.cost);
  for (int i = 1; i <= p.n; ++i) {
    terms.push_back(Expr::costate(i) * p.dynamics[static_cast<std::size_t>(i) - 1]);
  }
  return simplify(Expr::sum(std::move(terms)));
}

PontryaginSystem pontryagin_system(const OptimalControlDelayProblem& p) {
  Expr H = hamiltonian(p);
  PontryaginSystem sys;
  for (bool advanced : {true, false}) {
    PontryaginBranch& branch = advanced ? sys.inner : sys.outer;
    for (int i = 1; i <= p.n; ++i) {
      branch.state.push_back(simplify(Expr::state_dot(i) - partial(H, Symbol::make(SymKind::costate, i, 0))));
      Expr costate_rhs = partial(H, Symbol::make(SymKind::state, i, 0));
      if (advanced) costate_rhs = costate_rhs + shift(partial(H, Symbol::make(SymKind::state, i, -1)), +1);
      branch.costate.push_back(simplify(Expr::costate_dot(i) + costate_rhs));
    }
    for (int j = 1; j <= p.m; ++j) {
      Expr stat = partial(H, Symbol::make(SymKind::control, j, 0));
      if (advanced) stat = stat + shift(partial(H, Symbol::make(SymKind::control, j, -1)), +1);
      branch.stationary.push_back(simplify(stat));
    }
  }
  return sys;
}

HamiltonianTimePair dH_dt_residual(const OptimalControlDelayProblem& p) {
  Expr H = hamiltonian(p);
  return HamiltonianTimePair{H, simplify(partial(H, Symbol::time()))};
}

}  // namespace delvar
