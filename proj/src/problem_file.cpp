#include "delvar/problem_file.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "delvar/expr_text.hpp"

namespace delvar {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  int key_column = 0;
  int value_column = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

std::string trim(const std::string& s, int* left_shift = nullptr) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  if (left_shift != nullptr) *left_shift = static_cast<int>(a);
  return s.substr(a, b - a);
}

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    int shift = 0;
    std::string body = trim(line, &shift);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError("malformed section header", line_no, shift + 1);
      std::string name = trim(body.substr(1, body.size() - 2));
      if (name.empty()) throw ParseError("empty section name", line_no, shift + 1);
      sections.push_back({name, line_no, {}});
      continue;
    }
    if (sections.empty()) throw ParseError("content before the first section header", line_no, shift + 1);
    std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, shift + 1);
    Entry e;
    e.line = line_no;
    e.key = trim(body.substr(0, eq));
    e.key_column = shift + 1;
    int vshift = 0;
    e.value = trim(body.substr(eq + 1), &vshift);
    e.value_column = shift + static_cast<int>(eq) + 2 + vshift;
    if (e.key.empty()) throw ParseError("empty key", line_no, e.key_column);
    if (e.value.empty()) throw ParseError("empty value for key '" + e.key + "'", line_no, e.value_column);
    sections.back().entries.push_back(std::move(e));
  }
  return sections;
}

Expr parse_entry_expr(const Entry& e) {
  try {
    return parse_expr(e.value);
  } catch (const ParseError& pe) {
    // Expression positions are relative to the value text; lift them to the
    // file.
    int column = pe.line() <= 1 ? e.value_column + (pe.column() > 0 ? pe.column() - 1 : 0) : pe.column();
    throw ParseError(std::string("in value of '") + e.key + "': " + pe.raw_message(), e.line, column);
  }
}

double parse_entry_number(const Entry& e) {
  Expr v = parse_entry_expr(e);
  if (!v.is_constant()) throw ParseError("'" + e.key + "' must be a numeric constant", e.line, e.value_column);
  return v.value().to_double();
}

int parse_entry_int(const Entry& e) {
  double v = parse_entry_number(e);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ParseError("'" + e.key + "' must be an integer", e.line, e.value_column);
  return i;
}

// `<expr> on [a, b]` for prehistory pieces.
PrehistoryPiece parse_piece(const Entry& e) {
  std::size_t on = e.value.rfind(" on ");
  if (on == std::string::npos) {
    throw ParseError("prehistory entries read '<expr> on [a, b]'", e.line, e.value_column);
  }
  std::string head = trim(e.value.substr(0, on));
  std::string range = trim(e.value.substr(on + 4));
  if (range.size() < 5 || range.front() != '[' || range.back() != ']') {
    throw ParseError("prehistory interval reads '[a, b]'", e.line, e.value_column);
  }
  std::string inner = range.substr(1, range.size() - 2);
  std::size_t comma = inner.find(',');
  if (comma == std::string::npos) throw ParseError("prehistory interval reads '[a, b]'", e.line, e.value_column);
  PrehistoryPiece piece;
  try {
    Expr lo = parse_expr(trim(inner.substr(0, comma)));
    Expr hi = parse_expr(trim(inner.substr(comma + 1)));
    if (!lo.is_constant() || !hi.is_constant()) {
      throw ParseError("prehistory interval bounds must be numeric", e.line, e.value_column);
    }
    piece.lo = lo.value().to_double();
    piece.hi = hi.value().to_double();
    piece.value = parse_expr(head);
  } catch (const ParseError& pe) {
    throw ParseError(std::string("in prehistory piece '") + e.key + "': " + pe.raw_message(), e.line,
                     e.value_column);
  }
  return piece;
}

// Indexed key like "xi3" or "q2": returns the 1-based index or 0 on mismatch.
int indexed_key(const std::string& key, const std::string& stem) {
  if (key.size() <= stem.size() || key.compare(0, stem.size(), stem) != 0) return 0;
  int idx = 0;
  for (std::size_t i = stem.size(); i < key.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(key[i]))) return 0;
    idx = idx * 10 + (key[i] - '0');
  }
  return idx;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  auto sections = tokenize(text);

  const Section* sec_problem = nullptr;
  const Section* sec_lagrangian = nullptr;
  const Section* sec_dynamics = nullptr;
  const Section* sec_prehistory = nullptr;
  const Section* sec_terminal = nullptr;
  const Section* sec_generators = nullptr;
  for (const auto& s : sections) {
    const Section** slot = nullptr;
    if (s.name == "problem") slot = &sec_problem;
    else if (s.name == "lagrangian") slot = &sec_lagrangian;
    else if (s.name == "dynamics") slot = &sec_dynamics;
    else if (s.name == "prehistory") slot = &sec_prehistory;
    else if (s.name == "terminal") slot = &sec_terminal;
    else if (s.name == "generators") slot = &sec_generators;
    if (slot == nullptr) throw ParseError("unknown section '" + s.name + "'", s.line, 1);
    if (*slot != nullptr) throw ParseError("duplicate section '" + s.name + "'", s.line, 1);
    *slot = &s;
  }
  if (sec_problem == nullptr) throw ParseError("missing [problem] section");

  std::string kind;
  int n = 0, m = 0;
  std::optional<double> tau, t1, t2;
  bool m_given = false;
  for (const auto& e : sec_problem->entries) {
    if (e.key == "kind") {
      kind = e.value;
      if (kind != "variational" && kind != "control") {
        throw ParseError("kind must be 'variational' or 'control'", e.line, e.value_column);
      }
    } else if (e.key == "n") {
      n = parse_entry_int(e);
    } else if (e.key == "m") {
      m = parse_entry_int(e);
      m_given = true;
    } else if (e.key == "tau") {
      tau = parse_entry_number(e);
    } else if (e.key == "t1") {
      t1 = parse_entry_number(e);
    } else if (e.key == "t2") {
      t2 = parse_entry_number(e);
    } else {
      throw ParseError("unknown key '" + e.key + "' in [problem]", e.line, e.key_column);
    }
  }
  if (kind.empty()) throw ParseError("[problem] is missing 'kind'", sec_problem->line, 1);
  if (n <= 0) throw ParseError("[problem] is missing a positive 'n'", sec_problem->line, 1);
  if (!tau || !t1 || !t2) throw ParseError("[problem] needs tau, t1 and t2", sec_problem->line, 1);
  bool control = kind == "control";
  if (control && !m_given) throw ParseError("[problem] of kind control needs 'm'", sec_problem->line, 1);
  if (!control && m_given) throw ParseError("'m' is only meaningful for control problems", sec_problem->line, 1);

  if (sec_lagrangian == nullptr) throw ParseError("missing [lagrangian] section");
  if (sec_lagrangian->entries.size() != 1 || sec_lagrangian->entries.front().key != "L") {
    throw ParseError("[lagrangian] holds exactly one key 'L'", sec_lagrangian->line, 1);
  }
  Expr lagrangian = parse_entry_expr(sec_lagrangian->entries.front());

  std::vector<Expr> dynamics;
  if (control) {
    if (sec_dynamics == nullptr) throw ParseError("control problems need a [dynamics] section");
    dynamics.assign(static_cast<std::size_t>(n), Expr::zero());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& e : sec_dynamics->entries) {
      int idx = indexed_key(e.key, "q");
      if (idx < 1 || idx > n) throw ParseError("unknown key '" + e.key + "' in [dynamics]", e.line, e.key_column);
      if (seen[static_cast<std::size_t>(idx) - 1]) {
        throw ParseError("duplicate dynamics for 'q" + std::to_string(idx) + "'", e.line, e.key_column);
      }
      seen[static_cast<std::size_t>(idx) - 1] = true;
      dynamics[static_cast<std::size_t>(idx) - 1] = parse_entry_expr(e);
    }
    for (int i = 0; i < n; ++i) {
      if (!seen[static_cast<std::size_t>(i)]) {
        throw ParseError("[dynamics] is missing 'q" + std::to_string(i + 1) + "'", sec_dynamics->line, 1);
      }
    }
  } else if (sec_dynamics != nullptr) {
    throw ParseError("[dynamics] is only meaningful for control problems", sec_dynamics->line, 1);
  }

  if (sec_prehistory == nullptr) throw ParseError("missing [prehistory] section");
  Prehistory prehistory;
  prehistory.components.assign(static_cast<std::size_t>(n), {});
  for (const auto& e : sec_prehistory->entries) {
    int idx = indexed_key(e.key, "q");
    if (idx < 1 || idx > n) throw ParseError("unknown key '" + e.key + "' in [prehistory]", e.line, e.key_column);
    prehistory.components[static_cast<std::size_t>(idx) - 1].push_back(parse_piece(e));
  }

  std::optional<std::vector<double>> terminal;
  if (sec_terminal != nullptr) {
    if (control) throw ParseError("[terminal] is only meaningful for variational problems", sec_terminal->line, 1);
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& e : sec_terminal->entries) {
      int idx = indexed_key(e.key, "q");
      if (idx < 1 || idx > n) throw ParseError("unknown key '" + e.key + "' in [terminal]", e.line, e.key_column);
      seen[static_cast<std::size_t>(idx) - 1] = true;
      values[static_cast<std::size_t>(idx) - 1] = parse_entry_number(e);
    }
    for (int i = 0; i < n; ++i) {
      if (!seen[static_cast<std::size_t>(i)]) {
        throw ParseError("[terminal] is missing 'q" + std::to_string(i + 1) + "'", sec_terminal->line, 1);
      }
    }
    terminal = std::move(values);
  }

  std::optional<GeneratorSet> generators;
  if (sec_generators != nullptr) {
    GeneratorSet g;
    g.xi.assign(static_cast<std::size_t>(n), Expr::zero());
    std::vector<bool> xi_seen(static_cast<std::size_t>(n), false);
    bool eta_seen = false;
    std::vector<Expr> rho(static_cast<std::size_t>(std::max(m, 0)), Expr::zero());
    std::vector<Expr> sigma(static_cast<std::size_t>(n), Expr::zero());
    bool any_rho = false, any_sigma = false;
    for (const auto& e : sec_generators->entries) {
      if (e.key == "eta") {
        g.eta = parse_entry_expr(e);
        eta_seen = true;
        continue;
      }
      if (int idx = indexed_key(e.key, "xi"); idx >= 1 && idx <= n) {
        g.xi[static_cast<std::size_t>(idx) - 1] = parse_entry_expr(e);
        xi_seen[static_cast<std::size_t>(idx) - 1] = true;
        continue;
      }
      if (int idx = indexed_key(e.key, "rho"); control && idx >= 1 && idx <= m) {
        rho[static_cast<std::size_t>(idx) - 1] = parse_entry_expr(e);
        any_rho = true;
        continue;
      }
      if (int idx = indexed_key(e.key, "sigma"); control && idx >= 1 && idx <= n) {
        sigma[static_cast<std::size_t>(idx) - 1] = parse_entry_expr(e);
        any_sigma = true;
        continue;
      }
      throw ParseError("unknown key '" + e.key + "' in [generators]", e.line, e.key_column);
    }
    if (!eta_seen) throw ParseError("[generators] is missing 'eta'", sec_generators->line, 1);
    for (int i = 0; i < n; ++i) {
      if (!xi_seen[static_cast<std::size_t>(i)]) {
        throw ParseError("[generators] is missing 'xi" + std::to_string(i + 1) + "'", sec_generators->line, 1);
      }
    }
    if (any_rho) g.rho = std::move(rho);
    if (any_sigma) g.sigma = std::move(sigma);
    generators = std::move(g);
  }

  ProblemFile out;
  if (control) {
    OptimalControlDelayProblem p;
    p.n = n;
    p.m = m;
    p.cost = lagrangian;
    p.dynamics = std::move(dynamics);
    p.tau = *tau;
    p.t1 = *t1;
    p.t2 = *t2;
    p.prehistory = std::move(prehistory);
    require_valid(validate(p));
    if (generators) require_valid(validate_generators(*generators, p));
    out.problem = std::move(p);
  } else {
    DelayedVariationalProblem p;
    p.n = n;
    p.lagrangian = lagrangian;
    p.tau = *tau;
    p.t1 = *t1;
    p.t2 = *t2;
    p.prehistory = std::move(prehistory);
    p.terminal = std::move(terminal);
    require_valid(validate(p));
    if (generators) require_valid(validate_generators(*generators, p));
    out.problem = std::move(p);
  }
  out.generators = std::move(generators);
  return out;
}

ProblemFile parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str());
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string write_problem(const ProblemFile& file) {
  std::ostringstream out;
  const bool control = file.is_control();
  int n = control ? file.control().n : file.variational().n;

  out << "[problem]\n";
  out << "kind = " << (control ? "control" : "variational") << "\n";
  out << "n = " << n << "\n";
  if (control) out << "m = " << file.control().m << "\n";
  double tau = control ? file.control().tau : file.variational().tau;
  double t1 = control ? file.control().t1 : file.variational().t1;
  double t2 = control ? file.control().t2 : file.variational().t2;
  out << "tau = " << format_double(tau) << "\n";
  out << "t1 = " << format_double(t1) << "\n";
  out << "t2 = " << format_double(t2) << "\n";

  out << "\n[lagrangian]\n";
  out << "L = " << render(control ? file.control().cost : file.variational().lagrangian) << "\n";

  if (control) {
    out << "\n[dynamics]\n";
    for (int i = 1; i <= n; ++i) {
      out << "q" << i << " = " << render(file.control().dynamics[static_cast<std::size_t>(i) - 1]) << "\n";
    }
  }

  const Prehistory& pre = control ? file.control().prehistory : file.variational().prehistory;
  out << "\n[prehistory]\n";
  for (int i = 1; i <= n; ++i) {
    for (const auto& piece : pre.components[static_cast<std::size_t>(i) - 1]) {
      out << "q" << i << " = " << render(piece.value) << " on [" << format_double(piece.lo) << ", "
          << format_double(piece.hi) << "]\n";
    }
  }

  if (!control && file.variational().terminal) {
    out << "\n[terminal]\n";
    for (int i = 1; i <= n; ++i) {
      out << "q" << i << " = " << format_double((*file.variational().terminal)[static_cast<std::size_t>(i) - 1])
          << "\n";
    }
  }

  if (file.generators) {
    out << "\n[generators]\n";
    out << "eta = " << render(file.generators->eta) << "\n";
    for (int i = 1; i <= n; ++i) {
      out << "xi" << i << " = " << render(file.generators->xi[static_cast<std::size_t>(i) - 1]) << "\n";
    }
    if (file.generators->rho) {
      for (std::size_t j = 0; j < file.generators->rho->size(); ++j) {
        out << "rho" << (j + 1) << " = " << render((*file.generators->rho)[j]) << "\n";
      }
    }
    if (file.generators->sigma) {
      for (std::size_t i = 0; i < file.generators->sigma->size(); ++i) {
        out << "sigma" << (i + 1) << " = " << render((*file.generators->sigma)[i]) << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace delvar
