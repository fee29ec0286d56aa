#include <doctest.h>

#include <cmath>

#include "delvar/solver.hpp"
#include "delvar/verify.hpp"
#include "support.hpp"

using namespace delvar;
using delvar::testing::E;
using delvar::testing::Rng;
using delvar::testing::example1;

namespace {

// Independent check for the quadratic fixture: assemble the normal equations
// with a finite-difference hessian of the objective itself and solve them by
// plain Gaussian elimination.
std::vector<double> normal_equation_solution(const DiscretizedObjective& obj) {
  const int dim = obj.dimension();
  std::vector<double> x0(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> g0 = obj.gradient(x0);
  // FD hessian columns from objective-only evaluations.
  std::vector<double> H(static_cast<std::size_t>(dim) * dim, 0.0);
  const double step = 1e-4;
  std::vector<double> xp = x0, xm = x0;
  for (int j = 0; j < dim; ++j) {
    xp[static_cast<std::size_t>(j)] += step;
    xm[static_cast<std::size_t>(j)] -= step;
    // central difference of the analytic gradient is exact for quadratics;
    // build it from objective values only to stay independent: g_r ~
    // (f(x + s e_r + s' e_j) ...) is overkill, use gradient of +/- columns.
    std::vector<double> gp, gm;
    gp.resize(static_cast<std::size_t>(dim));
    gm.resize(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) {
      std::vector<double> y = xp;
      const double hr = 1e-4;
      y[static_cast<std::size_t>(r)] += hr;
      double fpp = obj.objective(y);
      y[static_cast<std::size_t>(r)] -= 2 * hr;
      double fpm = obj.objective(y);
      gp[static_cast<std::size_t>(r)] = (fpp - fpm) / (2 * hr);
      y = xm;
      y[static_cast<std::size_t>(r)] += hr;
      double fmp = obj.objective(y);
      y[static_cast<std::size_t>(r)] -= 2 * hr;
      double fmm = obj.objective(y);
      gm[static_cast<std::size_t>(r)] = (fmp - fmm) / (2 * hr);
    }
    for (int r = 0; r < dim; ++r) {
      H[static_cast<std::size_t>(r) * dim + j] = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) / (2 * step);
    }
    xp[static_cast<std::size_t>(j)] = x0[static_cast<std::size_t>(j)];
    xm[static_cast<std::size_t>(j)] = x0[static_cast<std::size_t>(j)];
  }
  // Solve H x = -g0 by Gaussian elimination with partial pivoting.
  std::vector<double> rhs(static_cast<std::size_t>(dim));
  for (int r = 0; r < dim; ++r) rhs[static_cast<std::size_t>(r)] = -g0[static_cast<std::size_t>(r)];
  for (int c = 0; c < dim; ++c) {
    int pivot = c;
    for (int r = c + 1; r < dim; ++r) {
      if (std::fabs(H[static_cast<std::size_t>(r) * dim + c]) > std::fabs(H[static_cast<std::size_t>(pivot) * dim + c])) pivot = r;
    }
    for (int cc = 0; cc < dim; ++cc) std::swap(H[static_cast<std::size_t>(c) * dim + cc], H[static_cast<std::size_t>(pivot) * dim + cc]);
    std::swap(rhs[static_cast<std::size_t>(c)], rhs[static_cast<std::size_t>(pivot)]);
    double d = H[static_cast<std::size_t>(c) * dim + c];
    for (int r = c + 1; r < dim; ++r) {
      double f = H[static_cast<std::size_t>(r) * dim + c] / d;
      for (int cc = c; cc < dim; ++cc) H[static_cast<std::size_t>(r) * dim + cc] -= f * H[static_cast<std::size_t>(c) * dim + cc];
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (int r = dim - 1; r >= 0; --r) {
    double acc = rhs[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < dim; ++c) acc -= H[static_cast<std::size_t>(r) * dim + c] * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = acc / H[static_cast<std::size_t>(r) * dim + r];
  }
  return x;
}

}  // namespace

TEST_CASE("discretize: example 1 grid bookkeeping at h = 0.5") {
  auto obj = discretize(example1(), 0.5);
  CHECK(obj.grid().k == 2);
  CHECK(obj.grid().steps == 6);
  CHECK(obj.grid().last == 8);
  // free nodes are the interior ones: t in {0.5, 1, 1.5, 2, 2.5}
  CHECK(obj.free_nodes().size() == 5);
  CHECK(obj.dimension() == 5);
  CHECK_THROWS_AS(discretize(example1(), 0.3), ValidationError);
}

TEST_CASE("discretize: gradient vanishes at a stationary trajectory") {
  auto p = example1();
  p.lagrangian = E("dq1^2");
  p.prehistory.components = {{{-1.0, 0.0, E("0")}}};
  p.terminal = std::vector<double>{0.0};
  auto obj = discretize(p, 0.5);
  std::vector<double> x(static_cast<std::size_t>(obj.dimension()), 0.0);  // constant zero trajectory
  for (double g : obj.gradient(x)) CHECK(g == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("solve: free particle straight line") {
  auto p = example1();
  p.lagrangian = E("dq1^2");
  p.prehistory.components = {{{-1.0, 0.0, E("0")}}};
  p.terminal = std::vector<double>{1.0};
  SolveReport report = solve(p, {0.1, 1e-12, 50});
  REQUIRE(report.converged);
  const Trajectory& traj = report.trajectory;
  for (int j = 0; j < traj.nodes(); ++j) {
    double t = traj.times[static_cast<std::size_t>(j)];
    double expected = t <= 0.0 ? 0.0 : t / 3.0;
    CHECK(traj.state(j, 1) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("solve: natural boundary keeps the trajectory constant") {
  auto p = example1();
  p.lagrangian = E("dq1^2");
  p.prehistory.components = {{{-1.0, 0.0, E("1/2")}}};
  p.terminal.reset();
  SolveReport report = solve(p, {0.25, 1e-12, 50});
  REQUIRE(report.converged);
  CHECK(report.objective == doctest::Approx(0.0).epsilon(1e-14));
  for (int j = 0; j < report.trajectory.nodes(); ++j) {
    CHECK(report.trajectory.state(j, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(report.iterations <= 1);
}

TEST_CASE("solve: example 1 converges in a few newton steps") {
  SolverConfig cfg{0.05, 1e-10, 50};
  SolveReport report = solve(example1(), cfg);
  REQUIRE(report.converged);
  CHECK(report.iterations <= 3);
  CHECK(report.grad_inf_norm <= 1e-10);
  // the discrete minimum of the delayed quadratic action
  CHECK(report.objective == doctest::Approx(0.5).epsilon(1e-10));

  // independent oracle: direct solution of the normal equations
  auto obj = discretize(example1(), 0.25);
  std::vector<double> direct = normal_equation_solution(obj);
  SolveReport report2 = solve(example1(), {0.25, 1e-10, 50});
  int n_free = static_cast<int>(obj.free_nodes().size());
  for (int f = 0; f < n_free; ++f) {
    int node = obj.free_nodes()[static_cast<std::size_t>(f)];
    CHECK(report2.trajectory.state(node, 1) == doctest::Approx(direct[static_cast<std::size_t>(f)]).epsilon(5e-6));
  }
}

TEST_CASE("solve: example 1 recovers the piecewise linear extremal") {
  SolveReport report = solve(example1(), {0.05, 1e-10, 50});
  REQUIRE(report.converged);
  const Trajectory& traj = report.trajectory;
  auto q_of = [&](double t) {
    // slopes 3/2, -3/2, 2 from q(0) = 0
    if (t <= 0.0) return -t;
    if (t <= 1.0) return 1.5 * t;
    if (t <= 2.0) return 1.5 - 1.5 * (t - 1.0);
    return 2.0 * (t - 2.0);
  };
  for (int j = 0; j < traj.nodes(); ++j) {
    CHECK(traj.state(j, 1) == doctest::Approx(q_of(traj.times[static_cast<std::size_t>(j)])).epsilon(1e-8));
  }
}

TEST_CASE("solve: deterministic reports") {
  SolveReport a = solve(example1(), {0.1, 1e-10, 50});
  SolveReport b = solve(example1(), {0.1, 1e-10, 50});
  CHECK(a.objective == b.objective);
  CHECK(a.grad_inf_norm == b.grad_inf_norm);
  CHECK(a.iterations == b.iterations);
  for (int j = 0; j < a.trajectory.nodes(); ++j) {
    CHECK(a.trajectory.state(j, 1) == b.trajectory.state(j, 1));
  }
}

TEST_CASE("solve: domain failure reports the node") {
  auto p = example1();
  p.lagrangian = E("log(q1)");
  p.prehistory.components = {{{-1.0, 0.0, E("-1")}}};
  p.terminal = std::vector<double>{-1.0};
  CHECK_THROWS_WITH_AS(solve(p, {0.5, 1e-10, 10}), doctest::Contains("node"), SolverError);
}

TEST_CASE("solve: delay-free harmonic fixture converges at first order or better") {
  auto p = example1();
  p.lagrangian = E("1/2*dq1^2 - 1/2*q1^2");
  p.t1 = 0.0;
  p.t2 = 2.0;
  p.tau = 1.0;
  p.prehistory.components = {{{-1.0, 0.0, E("1")}}};
  p.terminal = std::vector<double>{0.3};
  // continuous solution through q(0)=1, q(2)=0.3
  double A = (0.3 - std::cos(2.0)) / std::sin(2.0);
  auto exact = [&](double t) { return A * std::sin(t) + std::cos(t); };

  double errors[3];
  double steps[3] = {0.1, 0.05, 0.025};
  for (int trial = 0; trial < 3; ++trial) {
    SolveReport report = solve(p, {steps[trial], 1e-12, 100});
    REQUIRE(report.converged);
    double err = 0.0;
    const Trajectory& traj = report.trajectory;
    for (int j = 0; j < traj.nodes(); ++j) {
      double t = traj.times[static_cast<std::size_t>(j)];
      if (t < 0.0) continue;
      err = std::max(err, std::fabs(traj.state(j, 1) - exact(t)));
    }
    errors[trial] = err;
  }
  double order1 = std::log2(errors[0] / errors[1]);
  double order2 = std::log2(errors[1] / errors[2]);
  CHECK(order1 >= 0.9);
  CHECK(order2 >= 0.9);
}

TEST_CASE("gradient matches finite differences on a random quartic") {
  Rng rng(4242);
  std::vector<Symbol> symbols = {
      Symbol::time(),
      Symbol::make(SymKind::state, 1, 0),  Symbol::make(SymKind::state_dot, 1, 0),
      Symbol::make(SymKind::state, 1, -1), Symbol::make(SymKind::state_dot, 1, -1),
  };
  auto p = example1();
  p.lagrangian = delvar::testing::random_polynomial(rng, symbols, 4);
  auto obj = discretize(p, 0.25);
  std::vector<double> x(static_cast<std::size_t>(obj.dimension()));
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  CHECK(gradient_check(obj, x) <= 1e-6);
}

TEST_CASE("solve: non-polynomial lagrangian uses the finite-difference hessian") {
  auto p = example1();
  p.lagrangian = E("exp(dq1) + 1/2*q1^2");
  p.t2 = 2.0;
  p.prehistory.components = {{{-1.0, 0.0, E("0")}}};
  p.terminal = std::vector<double>{0.2};
  auto obj = discretize(p, 0.25);
  CHECK_FALSE(obj.analytic_hessian());
  SolveReport report = solve(p, {0.25, 1e-9, 100});
  CHECK(report.converged);
  CHECK(report.grad_inf_norm <= 1e-9);
}

TEST_CASE("solve: unbounded objective reports non-convergence without crashing") {
  auto p = example1();
  p.lagrangian = E("t*dq1");  // linear: no minimizer
  SolveReport report = solve(p, {0.25, 1e-12, 20});
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 20);
}

TEST_CASE("analytic hessian matches finite differences of the gradient") {
  Rng rng(31337);
  std::vector<Symbol> symbols = {
      Symbol::time(),
      Symbol::make(SymKind::state, 1, 0),  Symbol::make(SymKind::state_dot, 1, 0),
      Symbol::make(SymKind::state, 1, -1), Symbol::make(SymKind::state_dot, 1, -1),
  };
  auto p = example1();
  p.lagrangian = delvar::testing::random_polynomial(rng, symbols, 4, 8);
  auto obj = discretize(p, 0.25);
  REQUIRE(obj.analytic_hessian());
  std::vector<double> x(static_cast<std::size_t>(obj.dimension()));
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);

  std::vector<double> analytic = obj.hessian(x);
  const int dim = obj.dimension();
  double worst = 0.0;
  std::vector<double> xp = x, xm = x;
  for (int j = 0; j < dim; ++j) {
    double step = 1e-6 * std::max(1.0, std::fabs(x[static_cast<std::size_t>(j)]));
    xp[static_cast<std::size_t>(j)] += step;
    xm[static_cast<std::size_t>(j)] -= step;
    std::vector<double> gp = obj.gradient(xp);
    std::vector<double> gm = obj.gradient(xm);
    for (int r = 0; r < dim; ++r) {
      double fd = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) / (2 * step);
      double err = std::fabs(fd - analytic[static_cast<std::size_t>(r) * dim + j]) /
                   std::max(1.0, std::fabs(analytic[static_cast<std::size_t>(r) * dim + j]));
      worst = std::max(worst, err);
    }
    xp[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
    xm[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("two-component delayed problem: solve and verify end to end") {
  DelayedVariationalProblem p;
  p.n = 2;
  p.lagrangian = E("(dq1 + dq2_tau)^2 + (dq2 + dq1_tau)^2 + q1*q2_tau");
  p.tau = 1.0;
  p.t1 = 0.0;
  p.t2 = 3.0;
  p.prehistory.components = {{{-1.0, 0.0, E("-t")}}, {{-1.0, 0.0, E("1/2*t + 1")}}};
  p.terminal = std::vector<double>{2.0, 0.5};
  SolveReport report = solve(p, {0.1, 1e-9, 100});
  REQUIRE(report.converged);

  // the discrete optimum satisfies its own optimality system; central
  // residuals stay small away from the corners
  ResidualReport el = residual_check(p, report.trajectory, euler_lagrange(p), "EL");
  CHECK(el.entries.size() == 4);
  CHECK(el.max_abs_smooth <= 0.2);

  auto obj = discretize(p, 0.1);
  std::vector<double> x(static_cast<std::size_t>(obj.dimension()));
  Rng rng(5);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  CHECK(gradient_check(obj, x) <= 1e-6);
}

TEST_CASE("two-component hessian agrees with finite differences") {
  Rng rng(808808);
  std::vector<Symbol> symbols = {Symbol::time()};
  for (int i = 1; i <= 2; ++i) {
    symbols.push_back(Symbol::make(SymKind::state, i, 0));
    symbols.push_back(Symbol::make(SymKind::state_dot, i, 0));
    symbols.push_back(Symbol::make(SymKind::state, i, -1));
    symbols.push_back(Symbol::make(SymKind::state_dot, i, -1));
  }
  DelayedVariationalProblem p;
  p.n = 2;
  p.lagrangian = delvar::testing::random_polynomial(rng, symbols, 4, 8);
  p.tau = 1.0;
  p.t1 = 0.0;
  p.t2 = 2.0;
  p.prehistory.components = {{{-1.0, 0.0, E("t")}}, {{-1.0, 0.0, E("1 - t")}}};
  auto obj = discretize(p, 0.25);
  REQUIRE(obj.analytic_hessian());
  std::vector<double> x(static_cast<std::size_t>(obj.dimension()));
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);

  std::vector<double> analytic = obj.hessian(x);
  const int dim = obj.dimension();
  double worst = 0.0;
  std::vector<double> xp = x, xm = x;
  for (int j = 0; j < dim; ++j) {
    double step = 1e-6;
    xp[static_cast<std::size_t>(j)] += step;
    xm[static_cast<std::size_t>(j)] -= step;
    std::vector<double> gp = obj.gradient(xp);
    std::vector<double> gm = obj.gradient(xm);
    for (int r = 0; r < dim; ++r) {
      double fd = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) / (2 * step);
      worst = std::max(worst, std::fabs(fd - analytic[static_cast<std::size_t>(r) * dim + j]) /
                                  std::max(1.0, std::fabs(analytic[static_cast<std::size_t>(r) * dim + j])));
    }
    xp[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
    xm[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
  }
  CHECK(worst <= 1e-6);
}
