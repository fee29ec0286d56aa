#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "delvar/expr.hpp"
#include "delvar/expr_text.hpp"
#include "delvar/problem.hpp"

namespace delvar::testing {

inline Expr E(const std::string& s) { return parse_expr(s); }

/// The delayed quadratic fixture: L = (dq1 + dq1_tau)^2, tau = 1 on [0, 3],
/// prehistory -t on [-1, 0], q(3) = 2.
inline DelayedVariationalProblem example1() {
  DelayedVariationalProblem p;
  p.n = 1;
  p.lagrangian = E("(dq1 + dq1_tau)^2");
  p.tau = 1.0;
  p.t1 = 0.0;
  p.t2 = 3.0;
  p.prehistory.components = {{{-1.0, 0.0, E("-t")}}};
  p.terminal = std::vector<double>{2.0};
  return p;
}

inline GeneratorSet time_shift_generators(int n) {
  GeneratorSet g;
  g.eta = Expr::one();
  g.xi.assign(static_cast<std::size_t>(n), Expr::zero());
  return g;
}

/// splitmix64; the same deterministic stream on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int pick(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

struct ExprGenConfig {
  std::vector<Symbol> pool;
  bool allow_functions = true;
  bool allow_log = false;
  bool allow_negative_exponents = false;
  int max_depth = 4;
};

inline ExprGenConfig default_pool() {
  ExprGenConfig cfg;
  cfg.pool = {
      Symbol::time(),
      Symbol::make(SymKind::state, 1, 0),
      Symbol::make(SymKind::state, 1, -1),
      Symbol::make(SymKind::state_dot, 1, 0),
      Symbol::make(SymKind::state_dot, 1, -1),
      Symbol::make(SymKind::state, 2, 0),
      Symbol::make(SymKind::state_dot, 2, 1),
  };
  return cfg;
}

inline Expr random_expr(Rng& rng, const ExprGenConfig& cfg, int depth = 0) {
  int leaf_bias = depth >= cfg.max_depth ? 100 : 35;
  int roll = rng.pick(100);
  if (roll < leaf_bias) {
    switch (rng.pick(3)) {
      case 0: return Expr::symbol(cfg.pool[static_cast<std::size_t>(rng.pick(static_cast<int>(cfg.pool.size())))]);
      case 1: return Expr::integer(rng.pick(7) - 3);
      default: return Expr::rational(rng.pick(9) - 4, 1 + rng.pick(4));
    }
  }
  switch (rng.pick(cfg.allow_functions ? 5 : 3)) {
    case 0: {
      std::vector<Expr> terms;
      int count = 2 + rng.pick(2);
      for (int i = 0; i < count; ++i) terms.push_back(random_expr(rng, cfg, depth + 1));
      return Expr::sum(std::move(terms));
    }
    case 1: {
      std::vector<Expr> factors;
      int count = 2 + rng.pick(2);
      for (int i = 0; i < count; ++i) factors.push_back(random_expr(rng, cfg, depth + 1));
      return Expr::product(std::move(factors));
    }
    case 2: {
      Expr base = random_expr(rng, cfg, depth + 1);
      while (base.kind() == ExprKind::power) base = base.children().front();  // no stacked exponents
      int e = 2 + rng.pick(2);
      if (cfg.allow_negative_exponents && rng.pick(4) == 0 && !base.is_zero()) e = -1 - rng.pick(2);
      if (base.is_zero() && e < 0) return Expr::one();
      return Expr::pow(base, e);
    }
    case 3: {
      Expr arg = random_expr(rng, cfg, depth + 1);
      return rng.pick(2) == 0 ? Expr::sin(arg) : Expr::cos(arg);
    }
    default: {
      Expr arg = random_expr(rng, cfg, depth + 1);
      if (cfg.allow_log && rng.pick(2) == 0) {
        // keep the argument positive: log(2 + arg^2)
        return Expr::log(Expr::integer(2) + Expr::pow(arg, 2));
      }
      return Expr::exp(arg);
    }
  }
}

/// Random polynomial in the given symbols with small integer coefficients,
/// total degree <= max_degree, at least one term.
inline Expr random_polynomial(Rng& rng, const std::vector<Symbol>& symbols, int max_degree, int max_terms = 5) {
  std::vector<Expr> terms;
  int count = 1 + rng.pick(max_terms);
  for (int t = 0; t < count; ++t) {
    std::vector<Expr> factors;
    factors.push_back(Expr::integer(rng.pick(9) - 4));
    int degree = rng.pick(max_degree + 1);
    for (int d = 0; d < degree; ++d) {
      factors.push_back(Expr::symbol(symbols[static_cast<std::size_t>(rng.pick(static_cast<int>(symbols.size())))]));
    }
    terms.push_back(Expr::product(std::move(factors)));
  }
  return Expr::sum(std::move(terms));
}

/// Binding along the synthetic smooth trajectory
///   q_i(t) = a_i sin(w_i t) + b_i t^2 + c_i,
/// with every symbol (state/dot/ddot at any offset) bound to the exact
/// analytic value at t + offset*tau. Controls/costates are not supported.
struct SyntheticTrajectory {
  double tau = 0.7;
  double a(int i) const { return 0.4 + 0.13 * i; }
  double w(int i) const { return 0.9 + 0.21 * i; }
  double b(int i) const { return 0.2 - 0.05 * i; }
  double c(int i) const { return 1.1 * i; }

  double value(int i, int deriv, double t) const {
    switch (deriv) {
      case 0: return a(i) * std::sin(w(i) * t) + b(i) * t * t + c(i);
      case 1: return a(i) * w(i) * std::cos(w(i) * t) + 2.0 * b(i) * t;
      default: return -a(i) * w(i) * w(i) * std::sin(w(i) * t) + 2.0 * b(i);
    }
  }

  Binding binding_at(const Expr& e, double t) const {
    Binding b;
    b.time_value = t;
    b.tau_value = tau;
    for (const Symbol& s : symbols_of(e)) {
      if (s.is_time()) continue;
      double ts = t + s.offset * tau;
      int deriv = s.kind == SymKind::state ? 0 : s.kind == SymKind::state_dot ? 1 : 2;
      b.set(s, value(s.index, deriv, ts));
    }
    return b;
  }
};

}  // namespace delvar::testing
