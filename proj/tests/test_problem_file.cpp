#include <doctest.h>

#include "delvar/problem_file.hpp"
#include "support.hpp"

using namespace delvar;
using delvar::testing::E;

namespace {

const char* example1_text = R"(# delayed quadratic action
[problem]
kind = variational
n = 1
tau = 1
t1 = 0
t2 = 3

[lagrangian]
L = (dq1 + dq1_tau)^2

[prehistory]
q1 = -t on [-1, 0]

[terminal]
q1 = 2

[generators]
eta = 1
xi1 = 0
)";

}  // namespace

TEST_CASE("parse_problem: example 1 file") {
  ProblemFile file = parse_problem(example1_text);
  REQUIRE_FALSE(file.is_control());
  const auto& p = file.variational();
  CHECK(p.n == 1);
  CHECK(p.tau == doctest::Approx(1.0));
  CHECK(p.t1 == doctest::Approx(0.0));
  CHECK(p.t2 == doctest::Approx(3.0));
  CHECK(p.lagrangian == E("(dq1 + dq1_tau)^2"));
  REQUIRE(p.terminal.has_value());
  CHECK((*p.terminal)[0] == doctest::Approx(2.0));
  REQUIRE(file.generators.has_value());
  CHECK(file.generators->eta == Expr::one());
  CHECK(file.generators->xi[0].is_zero());
  CHECK(validate(p).empty());
}

TEST_CASE("parse_problem: control file") {
  const char* text = R"(
[problem]
kind = control
n = 1
m = 1
tau = 1
t1 = 0
t2 = 3

[lagrangian]
L = u1^2 + q1*u1_tau

[dynamics]
q1 = u1 + q1_tau

[prehistory]
q1 = 0 on [-1, 0]

[generators]
eta = 1
xi1 = 0
rho1 = 0
sigma1 = 0
)";
  ProblemFile file = parse_problem(text);
  REQUIRE(file.is_control());
  const auto& p = file.control();
  CHECK(p.m == 1);
  CHECK(p.dynamics[0] == E("u1 + q1_tau"));
  REQUIRE(file.generators.has_value());
  CHECK(file.generators->rho.has_value());
  CHECK(file.generators->sigma.has_value());
}

TEST_CASE("parse_problem: grammar violations carry locations") {
  // non-integer exponent inside an expression value
  const char* bad_exponent = R"([problem]
kind = variational
n = 1
tau = 1
t1 = 0
t2 = 3

[lagrangian]
L = dq1 ^ q1

[prehistory]
q1 = 0 on [-1, 0]
)";
  CHECK_THROWS_AS(parse_problem(bad_exponent), ParseError);
  try {
    parse_problem(bad_exponent);
  } catch (const ParseError& e) {
    CHECK(e.line() == 9);
  }
}

TEST_CASE("parse_problem: validation surfaces with the field name") {
  const char* bad_tau = R"([problem]
kind = variational
n = 1
tau = 5
t1 = 0
t2 = 3

[lagrangian]
L = dq1^2

[prehistory]
q1 = 0 on [-5, 0]
)";
  CHECK_THROWS_WITH_AS(parse_problem(bad_tau), doctest::Contains("tau"), ValidationError);
}

TEST_CASE("parse_problem: unknown keys and sections are errors") {
  CHECK_THROWS_AS(parse_problem("[nonsense]\nx = 1\n"), ParseError);
  const char* unknown_key = R"([problem]
kind = variational
n = 1
tau = 1
t1 = 0
t2 = 3
flavour = vanilla

[lagrangian]
L = dq1^2

[prehistory]
q1 = 0 on [-1, 0]
)";
  CHECK_THROWS_WITH_AS(parse_problem(unknown_key), doctest::Contains("flavour"), ParseError);
}

TEST_CASE("parse_problem: multi-piece prehistories") {
  const char* text = R"([problem]
kind = variational
n = 1
tau = 1
t1 = 0
t2 = 3

[lagrangian]
L = dq1^2 + q1_tau^2

[prehistory]
q1 = -t on [-1, -1/2]
q1 = t + 1 on [-1/2, 0]
)";
  ProblemFile file = parse_problem(text);
  const auto& pre = file.variational().prehistory;
  REQUIRE(pre.components[0].size() == 2);
  CHECK(prehistory_eval(pre, -0.5)[0] == doctest::Approx(0.5));
  CHECK(prehistory_eval(pre, -0.25)[0] == doctest::Approx(0.75));
}

TEST_CASE("write_problem: round trip preserves problems and validation") {
  ProblemFile file = parse_problem(example1_text);
  std::string text = write_problem(file);
  ProblemFile back = parse_problem(text);
  REQUIRE_FALSE(back.is_control());
  CHECK(back.variational().lagrangian == file.variational().lagrangian);
  CHECK(back.variational().tau == file.variational().tau);
  CHECK(back.variational().prehistory.components[0][0].value ==
        file.variational().prehistory.components[0][0].value);
  CHECK((*back.variational().terminal)[0] == (*file.variational().terminal)[0]);
  CHECK(back.generators->eta == file.generators->eta);
  CHECK(validate(back.variational()).empty());
}

TEST_CASE("write_problem: control round trip with rho and sigma") {
  const char* text = R"([problem]
kind = control
n = 2
m = 1
tau = 1/2
t1 = 0
t2 = 2

[lagrangian]
L = u1^2 + q2*q1_tau

[dynamics]
q1 = u1
q2 = q1 + u1_tau

[prehistory]
q1 = -t on [-1/2, -1/4]
q1 = t + 1/2 on [-1/4, 0]
q2 = 1 on [-1/2, 0]

[generators]
eta = 1
xi1 = 0
xi2 = q1
rho1 = u1
sigma1 = 0
sigma2 = t
)";
  ProblemFile file = parse_problem(text);
  ProblemFile back = parse_problem(write_problem(file));
  REQUIRE(back.is_control());
  CHECK(back.control().tau == file.control().tau);
  CHECK(back.control().dynamics[1] == file.control().dynamics[1]);
  CHECK(back.control().prehistory.components[0].size() == 2);
  REQUIRE(back.generators.has_value());
  CHECK((*back.generators->rho)[0] == E("u1"));
  CHECK((*back.generators->sigma)[1] == E("t"));
  CHECK(back.generators->xi[1] == E("q1"));
}
