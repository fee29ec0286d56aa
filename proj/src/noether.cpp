#include "delvar/noether.hpp"

#include <cmath>

#include "delvar/conditions.hpp"

namespace delvar {

namespace {

Expr combined(const Expr& f, SymKind kind, int i, bool with_advanced) {
  Expr g = partial(f, Symbol::make(kind, i, 0));
  if (with_advanced) g = g + shift(partial(f, Symbol::make(kind, i, -1)), +1);
  return g;
}

Expr variational_integrand(const DelayedVariationalProblem& p, const GeneratorSet& g, bool advanced) {
  Expr d_eta = total_time_derivative(g.eta);
  std::vector<Expr> terms;
  terms.push_back(partial(p.lagrangian, Symbol::time()) * g.eta);
  for (int i = 1; i <= p.n; ++i) {
    const Expr& xi = g.xi[static_cast<std::size_t>(i) - 1];
    Expr d_xi = total_time_derivative(xi);
    terms.push_back(combined(p.lagrangian, SymKind::state, i, advanced) * xi);
    terms.push_back(combined(p.lagrangian, SymKind::state_dot, i, advanced) *
                    (d_xi - Expr::state_dot(i) * d_eta));
  }
  terms.push_back(p.lagrangian * d_eta);
  return simplify(Expr::sum(std::move(terms)));
}

Expr control_integrand(const OptimalControlDelayProblem& p, const GeneratorSet& g, const Expr& H, bool advanced) {
  Expr d_eta = total_time_derivative(g.eta);
  std::vector<Expr> terms;
  terms.push_back(partial(H, Symbol::time()) * g.eta);
  std::vector<Expr> p_dot_q;  // sum_i p_i * dq_i
  for (int i = 1; i <= p.n; ++i) {
    const Expr& xi = g.xi[static_cast<std::size_t>(i) - 1];
    Expr d_xi = total_time_derivative(xi);
    terms.push_back(combined(H, SymKind::state, i, advanced) * xi);
    terms.push_back(-(Expr::costate(i) * (d_xi - Expr::state_dot(i) * d_eta)));
    if (g.sigma) {
      terms.push_back((partial(H, Symbol::make(SymKind::costate, i, 0)) - Expr::state_dot(i)) *
                      (*g.sigma)[static_cast<std::size_t>(i) - 1]);
    }
    p_dot_q.push_back(Expr::costate(i) * Expr::state_dot(i));
  }
  if (g.rho) {
    for (int j = 1; j <= p.m; ++j) {
      terms.push_back(combined(H, SymKind::control, j, advanced) * (*g.rho)[static_cast<std::size_t>(j) - 1]);
    }
  }
  terms.push_back((H - Expr::sum(std::move(p_dot_q))) * d_eta);
  return simplify(Expr::sum(std::move(terms)));
}

}  // namespace

InvarianceIntegrands invariance_integrands(const DelayedVariationalProblem& p, const GeneratorSet& g) {
  require_valid(validate(p));
  require_valid(validate_generators(g, p));
  return InvarianceIntegrands{variational_integrand(p, g, true), variational_integrand(p, g, false)};
}

InvarianceIntegrands invariance_integrands(const OptimalControlDelayProblem& p, const GeneratorSet& g) {
  require_valid(validate(p));
  require_valid(validate_generators(g, p));
  if (contains_kind(g.eta, SymKind::control)) {
    throw ValidationError("generators.eta: control-dependent eta is not supported by the invariance check");
  }
  for (const Expr& xi : g.xi) {
    if (contains_kind(xi, SymKind::control)) {
      throw ValidationError("generators.xi: control-dependent xi is not supported by the invariance check");
    }
  }
  Expr H = hamiltonian(p);
  return InvarianceIntegrands{control_integrand(p, g, H, true), control_integrand(p, g, H, false)};
}

namespace {

// Deterministic uniform double in [0, 1) built from raw 64-bit draws so the
// stream does not depend on the standard library's distribution details.
double draw_unit(std::uint64_t& state) {
  // splitmix64
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

InvarianceReport sample_integrands(const InvarianceIntegrands& integrands, const InvarianceConfig& cfg) {
  InvarianceReport report;
  report.samples = cfg.samples;
  report.inner.symbolic_zero = integrands.inner.is_zero();
  report.outer.symbolic_zero = integrands.outer.is_zero();

  bool any_above_tol = false;
  bool any_above_10tol = false;

  std::uint64_t state = cfg.seed;
  for (const bool use_inner : {true, false}) {
    const Expr& e = use_inner ? integrands.inner : integrands.outer;
    IntervalInvariance& iv = use_inner ? report.inner : report.outer;
    if (iv.symbolic_zero) continue;
    auto syms = symbols_of(e);
    double max_abs = 0.0;
    int valid = 0;
    for (int s = 0; s < cfg.samples; ++s) {
      Binding b;
      b.time_value = 4.0 * draw_unit(state) - 2.0;
      b.tau_value = 4.0 * draw_unit(state) - 2.0;
      for (const Symbol& sym : syms) {
        double v = 4.0 * draw_unit(state) - 2.0;
        if (sym.is_time()) {
          b.time_value = v;
        } else {
          b.set(sym, v);
        }
      }
      double value;
      try {
        value = eval(e, b);
      } catch (const EvalError&) {
        continue;  // domain failure at this sample; counted as invalid
      }
      ++valid;
      max_abs = std::max(max_abs, std::fabs(value));
    }
    iv.sampled_max = max_abs;
    if (valid < (cfg.samples + 1) / 2) {
      // Too few usable samples to say anything.
      report.verdict = Verdict::inconclusive;
      return report;
    }
    if (max_abs > cfg.tolerance) any_above_tol = true;
    if (max_abs > 10.0 * cfg.tolerance) any_above_10tol = true;
  }

  if (any_above_10tol) {
    report.verdict = Verdict::not_invariant;
  } else if (!any_above_tol) {
    report.verdict = Verdict::invariant;
  } else {
    report.verdict = Verdict::inconclusive;
  }
  return report;
}

}  // namespace

InvarianceReport check_invariance(const DelayedVariationalProblem& p, const GeneratorSet& g,
                                  const InvarianceConfig& cfg) {
  return sample_integrands(invariance_integrands(p, g), cfg);
}

InvarianceReport check_invariance(const OptimalControlDelayProblem& p, const GeneratorSet& g,
                                  const InvarianceConfig& cfg) {
  return sample_integrands(invariance_integrands(p, g), cfg);
}

PiecewiseCharge noether_charge(const DelayedVariationalProblem& p, const GeneratorSet& g) {
  require_valid(validate(p));
  require_valid(validate_generators(g, p));
  PiecewiseCharge charge;
  for (const bool advanced : {true, false}) {
    std::vector<Expr> terms;
    std::vector<Expr> carried;  // L - sum_i dq_i * momentum_i
    carried.push_back(p.lagrangian);
    for (int i = 1; i <= p.n; ++i) {
      Expr momentum = combined(p.lagrangian, SymKind::state_dot, i, advanced);
      terms.push_back(momentum * g.xi[static_cast<std::size_t>(i) - 1]);
      carried.push_back(-(Expr::state_dot(i) * momentum));
    }
    terms.push_back(Expr::sum(std::move(carried)) * g.eta);
    (advanced ? charge.inner : charge.outer) = simplify(Expr::sum(std::move(terms)));
  }
  return charge;
}

Expr noether_charge_oc(const OptimalControlDelayProblem& p, const GeneratorSet& g) {
  require_valid(validate(p));
  require_valid(validate_generators(g, p));
  Expr H = hamiltonian(p);
  std::vector<Expr> terms;
  for (int i = 1; i <= p.n; ++i) {
    terms.push_back(-(Expr::costate(i) * g.xi[static_cast<std::size_t>(i) - 1]));
  }
  terms.push_back(H * g.eta);
  return simplify(Expr::sum(std::move(terms)));
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::invariant: return "Invariant";
    case Verdict::not_invariant: return "NotInvariant";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

}  // namespace delvar
