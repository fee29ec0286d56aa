#include <doctest.h>

#include "delvar/conditions.hpp"
#include "delvar/noether.hpp"
#include "support.hpp"

using namespace delvar;
using delvar::testing::E;
using delvar::testing::Rng;
using delvar::testing::example1;
using delvar::testing::time_shift_generators;

namespace {

OptimalControlDelayProblem autonomous_oc() {
  OptimalControlDelayProblem oc;
  oc.n = 1;
  oc.m = 1;
  oc.cost = E("u1^2 + q1*u1_tau");
  oc.dynamics = {E("u1 + q1_tau")};
  oc.tau = 1.0;
  oc.t1 = 0.0;
  oc.t2 = 3.0;
  oc.prehistory.components = {{{-1.0, 0.0, E("0")}}};
  return oc;
}

}  // namespace

TEST_CASE("invariance_integrands: example 1 time shift collapses to zero") {
  auto g = time_shift_generators(1);
  auto integ = invariance_integrands(example1(), g);
  CHECK(integ.inner.is_zero());
  CHECK(integ.outer.is_zero());
}

TEST_CASE("invariance_integrands: null generator") {
  GeneratorSet g;
  g.eta = Expr::zero();
  g.xi = {Expr::zero()};
  auto integ = invariance_integrands(example1(), g);
  CHECK(integ.inner.is_zero());
  CHECK(integ.outer.is_zero());
}

TEST_CASE("invariance_integrands: failing generator leaves a residual") {
  auto p = example1();
  p.lagrangian = E("dq1^2");
  GeneratorSet g;
  g.eta = Expr::zero();
  g.xi = {E("t")};
  auto integ = invariance_integrands(p, g);
  // dL/ddq * d(xi)/dt = 2*dq1
  CHECK(integ.outer == E("2*dq1"));
  CHECK_FALSE(integ.inner.is_zero());
}

TEST_CASE("check_invariance: verdicts") {
  auto g = time_shift_generators(1);
  auto report = check_invariance(example1(), g);
  CHECK(report.verdict == Verdict::invariant);
  CHECK(report.inner.symbolic_zero);
  CHECK(report.outer.symbolic_zero);

  auto p = example1();
  p.lagrangian = E("t*dq1^2");
  report = check_invariance(p, g);
  CHECK(report.verdict == Verdict::not_invariant);
  REQUIRE(report.inner.sampled_max.has_value());
  CHECK(*report.inner.sampled_max > 1e-8);

  // deterministic across runs
  auto report2 = check_invariance(p, g);
  CHECK(*report2.inner.sampled_max == *report.inner.sampled_max);
}

TEST_CASE("check_invariance: autonomous control family") {
  GeneratorSet g = time_shift_generators(1);
  g.rho = std::vector<Expr>{Expr::zero()};
  g.sigma = std::vector<Expr>{Expr::zero()};
  auto report = check_invariance(autonomous_oc(), g);
  CHECK(report.verdict == Verdict::invariant);
  CHECK(report.inner.symbolic_zero);

  auto oc = autonomous_oc();
  oc.cost = E("t*u1^2");
  report = check_invariance(oc, g);
  CHECK(report.verdict == Verdict::not_invariant);
}

TEST_CASE("noether_charge: example 1 pieces") {
  auto charge = noether_charge(example1(), time_shift_generators(1));
  CHECK(charge.inner == E("(dq1 + dq1_tau)^2 - 2*dq1*(2*dq1 + dq1_tau + dq1_adv)"));
  CHECK(charge.outer == E("(dq1 + dq1_tau)^2 - 2*dq1*(dq1 + dq1_tau)"));
}

TEST_CASE("noether_charge: classical energy") {
  auto p = example1();
  p.lagrangian = E("1/2*dq1^2");
  auto charge = noether_charge(p, time_shift_generators(1));
  CHECK(charge.inner == E("-1/2*dq1^2"));
  CHECK(charge.outer == E("-1/2*dq1^2"));
  CHECK(charge.inner == charge.outer);
}

TEST_CASE("noether_charge: delay-free reduction matches the classical formula") {
  auto p = example1();
  p.lagrangian = E("1/2*dq1^2 - 1/2*q1^2 + t*q1");
  GeneratorSet g;
  g.eta = E("2");
  g.xi = {E("q1 + t")};
  auto charge = noether_charge(p, g);
  Expr momentum = partial(p.lagrangian, Symbol::make(SymKind::state_dot, 1, 0));
  Expr classical = simplify(momentum * g.xi[0] + (p.lagrangian - Expr::state_dot(1) * momentum) * g.eta);
  CHECK(charge.inner == classical);
  CHECK(charge.outer == classical);
}

TEST_CASE("noether_charge: linear in the generators") {
  Rng rng(1212);
  std::vector<Symbol> symbols = {
      Symbol::make(SymKind::state, 1, 0),
      Symbol::make(SymKind::state_dot, 1, 0),
      Symbol::make(SymKind::state, 1, -1),
      Symbol::make(SymKind::state_dot, 1, -1),
  };
  for (int trial = 0; trial < 20; ++trial) {
    auto p = example1();
    p.lagrangian = delvar::testing::random_polynomial(rng, symbols, 3);
    GeneratorSet g;
    g.eta = delvar::testing::random_polynomial(rng, {Symbol::time(), symbols[0]}, 2);
    g.xi = {delvar::testing::random_polynomial(rng, {Symbol::time(), symbols[0]}, 2)};
    Expr c = Expr::integer(rng.pick(9) - 4);
    GeneratorSet scaled;
    scaled.eta = simplify(c * g.eta);
    scaled.xi = {simplify(c * g.xi[0])};
    auto charge = noether_charge(p, g);
    auto charge_scaled = noether_charge(p, scaled);
    CHECK(simplify(charge_scaled.inner - c * charge.inner).is_zero());
    CHECK(simplify(charge_scaled.outer - c * charge.outer).is_zero());
  }
}

TEST_CASE("noether_charge: outer piece never uses advanced symbols") {
  Rng rng(1313);
  std::vector<Symbol> symbols = {
      Symbol::make(SymKind::state, 1, 0),
      Symbol::make(SymKind::state_dot, 1, 0),
      Symbol::make(SymKind::state, 1, -1),
      Symbol::make(SymKind::state_dot, 1, -1),
  };
  for (int trial = 0; trial < 50; ++trial) {
    auto p = example1();
    p.lagrangian = delvar::testing::random_polynomial(rng, symbols, 4);
    auto charge = noether_charge(p, time_shift_generators(1));
    for (const Symbol& s : symbols_of(charge.outer)) CHECK(s.offset <= 0);
    for (const Symbol& s : symbols_of(charge.inner)) CHECK(s.offset <= 1);
  }
}

TEST_CASE("noether_charge_oc: autonomous charge is the hamiltonian") {
  GeneratorSet g = time_shift_generators(1);
  auto oc = autonomous_oc();
  CHECK(noether_charge_oc(oc, g) == hamiltonian(oc));

  GeneratorSet null_gen;
  null_gen.eta = Expr::zero();
  null_gen.xi = {Expr::zero()};
  CHECK(noether_charge_oc(oc, null_gen).is_zero());
}

TEST_CASE("noether_charge_oc: phi = u reduction equals the inner lagrangian charge") {
  // Substitute the stationary-condition costate into -p.xi + H*eta and
  // compare with the Lagrangian inner piece.
  auto p = example1();
  OptimalControlDelayProblem oc;
  oc.n = 1;
  oc.m = 1;
  SymbolMap to_control;
  to_control.emplace(Symbol::make(SymKind::state_dot, 1, 0), Expr::control(1, 0));
  to_control.emplace(Symbol::make(SymKind::state_dot, 1, -1), Expr::control(1, -1));
  oc.cost = substitute(p.lagrangian, to_control);
  oc.dynamics = {Expr::control(1)};
  oc.tau = p.tau;
  oc.t1 = p.t1;
  oc.t2 = p.t2;
  oc.prehistory = p.prehistory;

  GeneratorSet g = time_shift_generators(1);
  Expr oc_charge = noether_charge_oc(oc, g);

  Expr momentum = simplify(partial(p.lagrangian, Symbol::make(SymKind::state_dot, 1, 0)) +
                           shift(partial(p.lagrangian, Symbol::make(SymKind::state_dot, 1, -1)), 1));
  SymbolMap back;
  back.emplace(Symbol::make(SymKind::control, 1, 0), Expr::state_dot(1, 0));
  back.emplace(Symbol::make(SymKind::control, 1, -1), Expr::state_dot(1, -1));
  back.emplace(Symbol::make(SymKind::costate, 1, 0), simplify(-momentum));
  Expr reduced = simplify(substitute(oc_charge, back));

  auto lagrangian_charge = noether_charge(p, g);
  CHECK(reduced == lagrangian_charge.inner);
}

TEST_CASE("check_invariance: residuals between the tolerances stay inconclusive") {
  auto p = example1();
  // dL/dt samples in (tolerance, 10x tolerance]: never called invariant or
  // falsified
  p.lagrangian = E("1e-9*t*dq1^2");
  auto report = check_invariance(p, time_shift_generators(1));
  CHECK(report.verdict == Verdict::inconclusive);
  REQUIRE(report.inner.sampled_max.has_value());
  CHECK(*report.inner.sampled_max > 1e-9);
  CHECK(*report.inner.sampled_max <= 1e-8);
}

TEST_CASE("state translation of the linear-quadratic control problem conserves the costate") {
  OptimalControlDelayProblem oc;
  oc.n = 1;
  oc.m = 1;
  oc.cost = E("u1^2");
  oc.dynamics = {E("u1")};
  oc.tau = 1.0;
  oc.t1 = 0.0;
  oc.t2 = 3.0;
  oc.prehistory.components = {{{-1.0, 0.0, E("0")}}};
  GeneratorSet g;
  g.eta = Expr::zero();
  g.xi = {Expr::one()};
  g.rho = std::vector<Expr>{Expr::zero()};
  g.sigma = std::vector<Expr>{Expr::zero()};
  auto report = check_invariance(oc, g);
  CHECK(report.verdict == Verdict::invariant);
  CHECK(noether_charge_oc(oc, g) == simplify(-Expr::costate(1)));
}

TEST_CASE("control invariance: costate and control directions are not free symmetries") {
  // A costate translation changes the augmented integrand by (phi - dq).sigma,
  // which is no identity in the sampled box; same for a bare control
  // translation. Both must be falsified, which pins the sigma and rho terms
  // of the integrand.
  auto oc = autonomous_oc();
  GeneratorSet sigma_only;
  sigma_only.eta = Expr::zero();
  sigma_only.xi = {Expr::zero()};
  sigma_only.rho = std::vector<Expr>{Expr::zero()};
  sigma_only.sigma = std::vector<Expr>{Expr::one()};
  auto integ = invariance_integrands(oc, sigma_only);
  // (dH/dp - dq1) * 1 = phi - dq1
  CHECK(integ.outer == simplify(oc.dynamics[0] - Expr::state_dot(1)));
  CHECK(check_invariance(oc, sigma_only).verdict == Verdict::not_invariant);

  GeneratorSet rho_only;
  rho_only.eta = Expr::zero();
  rho_only.xi = {Expr::zero()};
  rho_only.rho = std::vector<Expr>{Expr::one()};
  rho_only.sigma = std::vector<Expr>{Expr::zero()};
  auto integ2 = invariance_integrands(oc, rho_only);
  Expr H = hamiltonian(oc);
  CHECK(integ2.outer == simplify(partial(H, Symbol::make(SymKind::control, 1, 0))));
  CHECK(check_invariance(oc, rho_only).verdict == Verdict::not_invariant);
}
