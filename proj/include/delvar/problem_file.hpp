#pragma once

#include <optional>
#include <string>
#include <variant>

#include "delvar/problem.hpp"

namespace delvar {

/// A parsed problem definition file: exactly one problem plus an optional
/// generator set.
struct ProblemFile {
  std::variant<DelayedVariationalProblem, OptimalControlDelayProblem> problem;
  std::optional<GeneratorSet> generators;

  bool is_control() const { return std::holds_alternative<OptimalControlDelayProblem>(problem); }
  const DelayedVariationalProblem& variational() const { return std::get<DelayedVariationalProblem>(problem); }
  const OptimalControlDelayProblem& control() const { return std::get<OptimalControlDelayProblem>(problem); }
};

/// Parse the INI-style definition format:
///
///   [problem]
///   kind = variational        # or control
///   n = 1                     # state dimension
///   m = 1                     # control dimension (control kind only)
///   tau = 1
///   t1 = 0
///   t2 = 3
///
///   [lagrangian]              # running cost for control problems
///   L = (dq1 + dq1_tau)^2
///
///   [dynamics]                # control kind only: q<i> = phi_i expression
///   q1 = u1
///
///   [prehistory]              # per component: expr in t on a sub-interval
///   q1 = -t on [-1, 0]
///
///   [terminal]                # optional fixed endpoint values
///   q1 = 2
///
///   [generators]              # optional
///   eta = 1
///   xi1 = 0
///
/// Unknown sections or keys are errors; full problem (and generator)
/// validation is applied before returning.
ProblemFile parse_problem(const std::string& text);
ProblemFile parse_problem_file(const std::string& path);

/// Serialize back to the definition format; parse_problem(write_problem(f))
/// reproduces the problem.
std::string write_problem(const ProblemFile& file);

}  // namespace delvar
