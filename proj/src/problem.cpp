#include "delvar/problem.hpp"

#include <cmath>

namespace delvar {

namespace {

const PrehistoryPiece* find_piece(const std::vector<PrehistoryPiece>& pieces, double t) {
  const double eps = 1e-12 * (1.0 + std::fabs(t));
  const PrehistoryPiece* hit = nullptr;
  for (const auto& piece : pieces) {
    if (t >= piece.lo - eps && t <= piece.hi + eps) hit = &piece;  // later piece wins at junctions
  }
  return hit;
}

double eval_piece(const PrehistoryPiece& piece, double t, int order) {
  Expr e = piece.value;
  for (int d = 0; d < order; ++d) e = total_time_derivative(e);
  Binding b;
  b.time_value = t;
  return eval(e, b);
}

}  // namespace

std::vector<double> prehistory_eval(const Prehistory& pre, double t) {
  return prehistory_derivative(pre, t, 0);
}

std::vector<double> prehistory_derivative(const Prehistory& pre, double t, int order) {
  std::vector<double> out;
  out.reserve(pre.components.size());
  for (std::size_t i = 0; i < pre.components.size(); ++i) {
    const PrehistoryPiece* piece = find_piece(pre.components[i], t);
    if (piece == nullptr) {
      throw Error("domain", "prehistory evaluated outside its interval (t=" + std::to_string(t) + ")");
    }
    out.push_back(eval_piece(*piece, t, order));
  }
  return out;
}

namespace {

void check_symbols(const Expr& e, const std::string& field, int n, int m, bool allow_dot, bool allow_control,
                   int min_offset, int max_offset, std::vector<Violation>& out) {
  for (const Symbol& s : symbols_of(e)) {
    if (s.is_time()) continue;
    bool kind_ok = false;
    switch (s.kind) {
      case SymKind::state: kind_ok = true; break;
      case SymKind::state_dot: kind_ok = allow_dot; break;
      case SymKind::control: kind_ok = allow_control; break;
      default: kind_ok = false; break;
    }
    if (!kind_ok) {
      out.push_back({field, "symbols", field + " contains disallowed symbol '" + s.name() + "'"});
      continue;
    }
    int dim = s.kind == SymKind::control ? m : n;
    if (s.index < 1 || s.index > dim) {
      out.push_back({field, "index", field + " references out-of-range component '" + s.name() + "'"});
    }
    if (s.offset < min_offset || s.offset > max_offset) {
      out.push_back({field, "offset", field + " contains symbol '" + s.name() + "' with offset outside [" +
                                         std::to_string(min_offset) + ", " + std::to_string(max_offset) + "]"});
    }
  }
}

void check_horizon(double tau, double t1, double t2, std::vector<Violation>& out) {
  if (!(tau > 0.0)) out.push_back({"tau", "positive-delay", "tau must be positive"});
  if (!(t1 < t2)) out.push_back({"t1", "horizon", "t1 must be smaller than t2"});
  if (!(tau < t2 - t1)) {
    out.push_back({"tau", "delay-bound", "tau must be smaller than the horizon t2 - t1"});
  }
}

void check_prehistory(const Prehistory& pre, int n, double tau, double t1, std::vector<Violation>& out) {
  if (static_cast<int>(pre.components.size()) != n) {
    out.push_back({"prehistory", "dimension", "prehistory must provide exactly n components"});
    return;
  }
  const double eps = 1e-9 * (1.0 + std::fabs(tau));
  for (int i = 0; i < n; ++i) {
    const auto& pieces = pre.components[i];
    std::string field = "prehistory.q" + std::to_string(i + 1);
    if (pieces.empty()) {
      out.push_back({field, "coverage", field + " has no pieces"});
      continue;
    }
    double cursor = t1 - tau;
    for (const auto& piece : pieces) {
      if (piece.hi <= piece.lo) {
        out.push_back({field, "interval", field + " has a piece with an empty interval"});
      }
      if (std::fabs(piece.lo - cursor) > eps) {
        out.push_back({field, "coverage", field + " pieces do not cover [t1 - tau, t1] without gaps or overlaps"});
      }
      cursor = piece.hi;
      for (const Symbol& s : symbols_of(piece.value)) {
        if (!s.is_time()) {
          out.push_back({field, "symbols", field + " pieces may only reference t (found '" + s.name() + "')"});
        }
      }
    }
    if (std::fabs(cursor - t1) > eps) {
      out.push_back({field, "coverage", field + " pieces must end exactly at t1"});
    }
  }
}

}  // namespace

std::vector<Violation> validate(const DelayedVariationalProblem& p) {
  std::vector<Violation> out;
  if (p.n < 1) out.push_back({"n", "dimension", "state dimension must be at least 1"});
  check_horizon(p.tau, p.t1, p.t2, out);
  check_symbols(p.lagrangian, "lagrangian", p.n, 0, /*allow_dot=*/true, /*allow_control=*/false, -1, 0, out);
  check_prehistory(p.prehistory, p.n, p.tau, p.t1, out);
  if (p.terminal && static_cast<int>(p.terminal->size()) != p.n) {
    out.push_back({"terminal", "dimension", "terminal value must have exactly n components"});
  }
  return out;
}

std::vector<Violation> validate(const OptimalControlDelayProblem& p) {
  std::vector<Violation> out;
  if (p.n < 1) out.push_back({"n", "dimension", "state dimension must be at least 1"});
  if (p.m < 1) out.push_back({"m", "dimension", "control dimension must be at least 1"});
  check_horizon(p.tau, p.t1, p.t2, out);
  check_symbols(p.cost, "cost", p.n, p.m, /*allow_dot=*/false, /*allow_control=*/true, -1, 0, out);
  if (static_cast<int>(p.dynamics.size()) != p.n) {
    out.push_back({"dynamics", "dimension", "dynamics must provide exactly n components"});
  }
  for (std::size_t i = 0; i < p.dynamics.size(); ++i) {
    check_symbols(p.dynamics[i], "dynamics.q" + std::to_string(i + 1), p.n, p.m, false, true, -1, 0, out);
  }
  check_prehistory(p.prehistory, p.n, p.tau, p.t1, out);
  return out;
}

namespace {

std::vector<Violation> validate_generators_impl(const GeneratorSet& g, int n, int m, bool control_problem) {
  std::vector<Violation> out;
  auto check_gen = [&](const Expr& e, const std::string& field) {
    check_symbols(e, field, n, m, /*allow_dot=*/false, /*allow_control=*/control_problem, 0, 0, out);
  };
  check_gen(g.eta, "generators.eta");
  if (static_cast<int>(g.xi.size()) != n) {
    out.push_back({"generators.xi", "dimension", "xi must have exactly n components"});
  }
  for (std::size_t i = 0; i < g.xi.size(); ++i) check_gen(g.xi[i], "generators.xi" + std::to_string(i + 1));
  if (!control_problem) {
    if (g.rho) out.push_back({"generators.rho", "scope", "rho is only meaningful for control problems"});
    if (g.sigma) out.push_back({"generators.sigma", "scope", "sigma is only meaningful for control problems"});
    return out;
  }
  if (g.rho) {
    if (static_cast<int>(g.rho->size()) != m) {
      out.push_back({"generators.rho", "dimension", "rho must have exactly m components"});
    }
    for (std::size_t j = 0; j < g.rho->size(); ++j) check_gen((*g.rho)[j], "generators.rho" + std::to_string(j + 1));
  }
  if (g.sigma) {
    if (static_cast<int>(g.sigma->size()) != n) {
      out.push_back({"generators.sigma", "dimension", "sigma must have exactly n components"});
    }
    for (std::size_t i = 0; i < g.sigma->size(); ++i) {
      check_gen((*g.sigma)[i], "generators.sigma" + std::to_string(i + 1));
    }
  }
  return out;
}

}  // namespace

std::vector<Violation> validate_generators(const GeneratorSet& g, const DelayedVariationalProblem& p) {
  return validate_generators_impl(g, p.n, 0, false);
}

std::vector<Violation> validate_generators(const GeneratorSet& g, const OptimalControlDelayProblem& p) {
  return validate_generators_impl(g, p.n, p.m, true);
}

void require_valid(const std::vector<Violation>& violations) {
  if (violations.empty()) return;
  std::string message;
  for (const auto& v : violations) {
    if (!message.empty()) message += "; ";
    message += v.field + ": " + v.message + " [" + v.rule + "]";
  }
  throw ValidationError(message);
}

}  // namespace delvar
