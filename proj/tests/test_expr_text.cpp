#include <doctest.h>

#include "support.hpp"

using namespace delvar;
using delvar::testing::E;
using delvar::testing::ExprGenConfig;
using delvar::testing::Rng;
using delvar::testing::random_expr;

TEST_CASE("parse: identifiers cover the symbol families") {
  CHECK(E("t") == Expr::time());
  CHECK(E("tau") == Expr::tau());
  CHECK(E("q3") == Expr::state(3));
  CHECK(E("dq2_tau") == Expr::state_dot(2, -1));
  CHECK(E("ddq1_adv") == Expr::state_ddot(1, 1));
  CHECK(E("u1_tau") == Expr::control(1, -1));
  CHECK(E("p2") == Expr::costate(2));
  CHECK(E("dp1") == Expr::costate_dot(1));
  CHECK(E("q1_adv2") == Expr::state(1, 2));
}

TEST_CASE("parse: precedence and associativity") {
  CHECK(E("2 + 3*4") == E("14"));
  CHECK(E("2*q1^2") == simplify(Expr::integer(2) * Expr::pow(Expr::state(1), 2)));
  CHECK(E("-q1^2") == simplify(-Expr::pow(Expr::state(1), 2)));
  CHECK(E("q1 - dq1 - t") == simplify(Expr::state(1) - Expr::state_dot(1) - Expr::time()));
  CHECK(E("6/3/2") == E("1"));
  CHECK(E("1/2*q1") == simplify(Expr::rational(1, 2) * Expr::state(1)));
}

TEST_CASE("parse: errors carry position and rule") {
  CHECK_THROWS_AS(E("dq1 ^ q1"), ParseError);       // non-integer exponent
  CHECK_THROWS_AS(E("q1^1.5"), ParseError);
  CHECK_THROWS_AS(E("bogus + 1"), ParseError);      // unknown identifier
  CHECK_THROWS_AS(E("q0"), ParseError);             // indices start at 1
  CHECK_THROWS_AS(E("(q1 + 1"), ParseError);        // unbalanced parens
  CHECK_THROWS_AS(E("sin q1"), ParseError);
  CHECK_THROWS_AS(E("1/0"), ParseError);
  try {
    E("q1 +\n  bogus");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
}

TEST_CASE("parse: decimal literals become exact rationals") {
  CHECK(E("0.5") == Expr::rational(1, 2));
  CHECK(E("2.50") == Expr::rational(5, 2));
  CHECK(E("1e-3") == Expr::rational(1, 1000));
  CHECK(E("2.5e2") == Expr::integer(250));
}

TEST_CASE("render: readable fixtures") {
  CHECK(render(E("(dq1 + dq1_tau)^2")) == "2*dq1*dq1_tau + dq1^2 + dq1_tau^2");
  CHECK(render(E("1/(dq1 + dq1_tau)")) == "1/(dq1 + dq1_tau)");
  CHECK(E("1/(dq1 + dq1_tau)^2") == E("1/(2*dq1*dq1_tau + dq1^2 + dq1_tau^2)"));
  CHECK(render(simplify(-Expr::state(1))) == "-q1");
  CHECK(render(E("q1/t")) == "q1/t");
  CHECK(render(E("3/(q1*dq1)")) == "3/(q1*dq1)");
  CHECK(render(E("1/2*q1")) == "1/2*q1");
  CHECK(render(E("q1 - 2*dq1")) == "q1 - 2*dq1");
  CHECK(render(Expr::zero()) == "0");
}

TEST_CASE("property: render/parse round trip") {
  Rng rng(808);
  ExprGenConfig cfg = delvar::testing::default_pool();
  cfg.allow_negative_exponents = true;
  cfg.allow_log = true;
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    Expr e = random_expr(rng, cfg);
    Expr back = parse_expr(render(e));
    if (!(back == e)) {
      ++failures;
      if (failures <= 3) {
        MESSAGE("round trip failed: ", render(e), " -> ", render(back));
      }
    }
  }
  CHECK(failures == 0);
}
