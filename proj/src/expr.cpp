#include "delvar/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace delvar {

struct Expr::Node {
  ExprKind kind;
  Number value;        // constant
  Symbol sym;          // symbol
  std::int64_t expo;   // power
  std::vector<Expr> kids;

  explicit Node(ExprKind k) : kind(k), expo(0) {}
};

using Node = Expr::Node;

// Raw node assembly lives in a friend so the normalizing constructors can
// build nodes that are already known to be canonical.
struct ExprBuilder {
  static Expr leaf_constant(const Number& v) {
    auto n = std::make_shared<Node>(ExprKind::constant);
    n->value = v;
    return Expr(std::move(n));
  }
  static Expr leaf_tau() {
    return Expr(std::make_shared<Node>(ExprKind::tau));
  }
  static Expr leaf_symbol(const Symbol& s) {
    auto n = std::make_shared<Node>(ExprKind::symbol);
    n->sym = s;
    return Expr(std::move(n));
  }
  static Expr node(ExprKind kind, std::vector<Expr> kids, std::int64_t expo = 0) {
    auto n = std::make_shared<Node>(kind);
    n->kids = std::move(kids);
    n->expo = expo;
    return Expr(std::move(n));
  }
};

namespace {

// (coefficient, monomial) view of a term. The monomial of a pure constant is
// the literal 1.
struct Term {
  Number coeff;
  Expr mono;
};

Term decompose(const Expr& e) {
  if (e.kind() == ExprKind::constant) return {e.value(), Expr::one()};
  if (e.kind() == ExprKind::product) {
    const auto& kids = e.children();
    if (!kids.empty() && kids.front().kind() == ExprKind::constant) {
      if (kids.size() == 2) return {kids.front().value(), kids[1]};
      std::vector<Expr> rest(kids.begin() + 1, kids.end());
      return {kids.front().value(), ExprBuilder::node(ExprKind::product, std::move(rest))};
    }
  }
  return {Number::integer(1), e};
}

// Rebuild coeff * mono without re-normalizing mono (mono is canonical).
Expr recompose(const Number& coeff, const Expr& mono) {
  if (coeff.is_zero()) return Expr::zero();
  if (mono.is_one()) return Expr::constant(coeff);
  if (coeff.is_one()) return mono;
  std::vector<Expr> kids;
  kids.push_back(Expr::constant(coeff));
  if (mono.kind() == ExprKind::product) {
    for (const auto& k : mono.children()) kids.push_back(k);
  } else {
    kids.push_back(mono);
  }
  return ExprBuilder::node(ExprKind::product, std::move(kids));
}

// Pull the positive rational content (and the sign of the leading term) out
// of a canonical sum, leaving a primitive sum. Inexact coefficients disable
// the extraction.
std::pair<Number, Expr> extract_content(const Expr& sum_expr) {
  const auto& kids = sum_expr.children();
  Number content = Number::integer(0);
  bool first = true;
  bool leading_negative = false;
  for (const auto& kid : kids) {
    Term t = decompose(kid);
    if (!t.coeff.exact()) return {Number::integer(1), sum_expr};
    if (first) {
      leading_negative = t.coeff.is_negative();
      content = t.coeff.is_negative() ? t.coeff.negated() : t.coeff;
      first = false;
    } else {
      content = Number::content_gcd(content, t.coeff);
    }
  }
  if (leading_negative) content = content.negated();
  if (content.is_one()) return {content, sum_expr};
  Number inv = content.reciprocal();
  std::vector<Expr> scaled;
  scaled.reserve(kids.size());
  for (const auto& kid : kids) {
    Term t = decompose(kid);
    scaled.push_back(recompose(t.coeff * inv, t.mono));
  }
  return {content, ExprBuilder::node(ExprKind::sum, std::move(scaled))};
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction / normalization
// ---------------------------------------------------------------------------

Expr Expr::constant(const Number& v) { return ExprBuilder::leaf_constant(v); }
Expr Expr::tau() { return ExprBuilder::leaf_tau(); }
Expr Expr::symbol(const Symbol& s) { return ExprBuilder::leaf_symbol(s); }

Expr Expr::sum(std::vector<Expr> terms) {
  Number const_acc = Number::integer(0);
  std::map<Expr, Number, Expr::Less> by_mono;
  std::vector<Expr> stack(terms.rbegin(), terms.rend());
  while (!stack.empty()) {
    Expr e = stack.back();
    stack.pop_back();
    switch (e.kind()) {
      case ExprKind::sum:
        for (auto it = e.children().rbegin(); it != e.children().rend(); ++it) stack.push_back(*it);
        break;
      case ExprKind::constant:
        const_acc = const_acc + e.value();
        break;
      default: {
        Term t = decompose(e);
        auto [it, inserted] = by_mono.emplace(t.mono, t.coeff);
        if (!inserted) it->second = it->second + t.coeff;
        break;
      }
    }
  }
  std::vector<Expr> out;
  out.reserve(by_mono.size() + 1);
  for (const auto& [mono, coeff] : by_mono) {
    if (coeff.is_zero()) continue;
    out.push_back(recompose(coeff, mono));
  }
  if (!const_acc.is_zero()) out.push_back(constant(const_acc));
  if (out.empty()) return zero();
  if (out.size() == 1) return out.front();
  return ExprBuilder::node(ExprKind::sum, std::move(out));
}

Expr Expr::product(std::vector<Expr> factors) {
  Number coeff = Number::integer(1);
  std::map<Expr, std::int64_t, Expr::Less> by_base;

  auto add_base = [&](const Expr& base, std::int64_t e, auto&& self) -> void {
    switch (base.kind()) {
      case ExprKind::constant:
        coeff = coeff * base.value().pow_int(e);
        break;
      case ExprKind::power:
        self(base.children().front(), e * base.exponent(), self);
        break;
      case ExprKind::product:
        for (const auto& k : base.children()) self(k, e, self);
        break;
      case ExprKind::sum: {
        auto [content, prim] = extract_content(base);
        if (!content.is_one()) coeff = coeff * content.pow_int(e);
        auto [it, inserted] = by_base.emplace(prim, e);
        if (!inserted) it->second += e;
        break;
      }
      default: {
        auto [it, inserted] = by_base.emplace(base, e);
        if (!inserted) it->second += e;
        break;
      }
    }
  };

  for (const auto& f : factors) add_base(f, 1, add_base);
  if (coeff.is_zero()) return zero();

  // Sums entering with a positive exponent distribute (e copies feed the
  // cross product below) so that different derivation routes normalize
  // identically; only negative powers of sums stay factored.
  std::vector<Expr> spread_sums;
  std::vector<Expr> out;
  out.reserve(by_base.size());
  for (const auto& [base, e] : by_base) {
    if (e == 0) continue;
    if (base.kind() == ExprKind::sum) {
      if (std::abs(e) > 16) throw EvalError("sum raised to an exponent beyond 16");
      if (e >= 1) {
        for (std::int64_t i = 0; i < e; ++i) spread_sums.push_back(base);
      } else if (e == -1) {
        out.push_back(ExprBuilder::node(ExprKind::power, {base}, -1));
      } else {
        // expanded-base reciprocal; pow() keeps this canonical
        Expr rec = pow(base, e);
        if (rec.kind() == ExprKind::product) {
          for (const auto& k : rec.children()) {
            if (k.kind() == ExprKind::constant) {
              coeff = coeff * k.value();
            } else {
              out.push_back(k);
            }
          }
        } else {
          out.push_back(rec);
        }
      }
      continue;
    }
    out.push_back(e == 1 ? base : ExprBuilder::node(ExprKind::power, {base}, e));
  }

  if (!spread_sums.empty()) {
    std::vector<std::vector<Expr>> combos;
    combos.push_back(out);
    for (const auto& s : spread_sums) {
      std::vector<std::vector<Expr>> next;
      next.reserve(combos.size() * s.children().size());
      for (const auto& combo : combos) {
        for (const auto& term : s.children()) {
          std::vector<Expr> extended = combo;
          extended.push_back(term);
          next.push_back(std::move(extended));
        }
      }
      combos = std::move(next);
    }
    std::vector<Expr> terms;
    terms.reserve(combos.size());
    for (auto& combo : combos) {
      combo.push_back(constant(coeff));
      terms.push_back(product(std::move(combo)));
    }
    return sum(std::move(terms));
  }

  if (out.empty()) return constant(coeff);
  if (coeff.is_one()) {
    if (out.size() == 1) return out.front();
    return ExprBuilder::node(ExprKind::product, std::move(out));
  }
  std::vector<Expr> kids;
  kids.reserve(out.size() + 1);
  kids.push_back(constant(coeff));
  for (auto& f : out) kids.push_back(std::move(f));
  return ExprBuilder::node(ExprKind::product, std::move(kids));
}

Expr Expr::pow(const Expr& base, std::int64_t exponent) {
  if (exponent == 0) return one();
  if (exponent == 1) return base;
  switch (base.kind()) {
    case ExprKind::constant:
      if (base.value().is_zero() && exponent < 0) throw EvalError("zero base with negative exponent");
      return constant(base.value().pow_int(exponent));
    case ExprKind::power:
      return pow(base.children().front(), base.exponent() * exponent);
    case ExprKind::product: {
      std::vector<Expr> parts;
      parts.reserve(base.children().size());
      for (const auto& k : base.children()) parts.push_back(pow(k, exponent));
      return product(std::move(parts));
    }
    case ExprKind::sum: {
      // Positive powers of sums expand so every polynomial reaches the same
      // normal form regardless of derivation route; reciprocals keep the
      // exponent -1 over an expanded base for the same reason.
      if (std::abs(exponent) > 16) throw EvalError("sum raised to an exponent beyond 16");
      if (exponent >= 2) {
        return product(std::vector<Expr>(static_cast<std::size_t>(exponent), base));
      }
      if (exponent < -1) return pow(pow(base, -exponent), -1);
      auto [content, prim] = extract_content(base);
      Expr p = ExprBuilder::node(ExprKind::power, {prim}, -1);
      if (content.is_one()) return p;
      return product({constant(content.reciprocal()), p});
    }
    default:
      return ExprBuilder::node(ExprKind::power, {base}, exponent);
  }
}

namespace {

Expr make_fn(ExprKind kind, const Expr& arg) {
  if (arg.is_constant()) {
    if (arg.is_zero()) {
      if (kind == ExprKind::fn_sin) return Expr::zero();
      if (kind == ExprKind::fn_cos || kind == ExprKind::fn_exp) return Expr::one();
    }
    if (arg.is_one() && kind == ExprKind::fn_log) return Expr::zero();
  }
  return ExprBuilder::node(kind, {arg});
}

}  // namespace

Expr Expr::sin(const Expr& arg) { return make_fn(ExprKind::fn_sin, arg); }
Expr Expr::cos(const Expr& arg) { return make_fn(ExprKind::fn_cos, arg); }
Expr Expr::exp(const Expr& arg) { return make_fn(ExprKind::fn_exp, arg); }
Expr Expr::log(const Expr& arg) { return make_fn(ExprKind::fn_log, arg); }

// ---------------------------------------------------------------------------
// Inspection and ordering
// ---------------------------------------------------------------------------

ExprKind Expr::kind() const { return node_->kind; }
const Number& Expr::value() const { return node_->value; }
const Symbol& Expr::symbol_ref() const { return node_->sym; }
std::int64_t Expr::exponent() const { return node_->expo; }
const std::vector<Expr>& Expr::children() const { return node_->kids; }

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  if (a.node_->kind != b.node_->kind) {
    return static_cast<int>(a.node_->kind) < static_cast<int>(b.node_->kind) ? -1 : 1;
  }
  switch (a.node_->kind) {
    case ExprKind::constant:
      return Number::compare(a.node_->value, b.node_->value);
    case ExprKind::tau:
      return 0;
    case ExprKind::symbol:
      return Symbol::compare(a.node_->sym, b.node_->sym);
    case ExprKind::power: {
      int c = compare(a.node_->kids.front(), b.node_->kids.front());
      if (c != 0) return c;
      if (a.node_->expo != b.node_->expo) return a.node_->expo < b.node_->expo ? -1 : 1;
      return 0;
    }
    default: {
      std::size_t na = a.node_->kids.size(), nb = b.node_->kids.size();
      for (std::size_t i = 0; i < na && i < nb; ++i) {
        int c = compare(a.node_->kids[i], b.node_->kids[i]);
        if (c != 0) return c;
      }
      if (na != nb) return na < nb ? -1 : 1;
      return 0;
    }
  }
}

// ---------------------------------------------------------------------------
// Calculus
// ---------------------------------------------------------------------------

Expr partial(const Expr& e, const Symbol& s) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
      return Expr::zero();
    case ExprKind::symbol:
      return e.symbol_ref() == s ? Expr::one() : Expr::zero();
    case ExprKind::sum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& k : e.children()) parts.push_back(partial(k, s));
      return Expr::sum(std::move(parts));
    }
    case ExprKind::product: {
      const auto& kids = e.children();
      std::vector<Expr> terms;
      terms.reserve(kids.size());
      for (std::size_t i = 0; i < kids.size(); ++i) {
        std::vector<Expr> factors;
        factors.reserve(kids.size());
        for (std::size_t j = 0; j < kids.size(); ++j) {
          factors.push_back(j == i ? partial(kids[j], s) : kids[j]);
        }
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case ExprKind::power: {
      const Expr& base = e.children().front();
      std::int64_t k = e.exponent();
      return Expr::product({Expr::integer(k), Expr::pow(base, k - 1), partial(base, s)});
    }
    case ExprKind::fn_sin:
      return Expr::product({Expr::cos(e.children().front()), partial(e.children().front(), s)});
    case ExprKind::fn_cos:
      return Expr::product({Expr::integer(-1), Expr::sin(e.children().front()), partial(e.children().front(), s)});
    case ExprKind::fn_exp:
      return Expr::product({e, partial(e.children().front(), s)});
    case ExprKind::fn_log:
      return Expr::product({partial(e.children().front(), s), Expr::pow(e.children().front(), -1)});
  }
  return Expr::zero();
}

Expr shift(const Expr& e, int k) {
  if (k == 0) return e;
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
      return e;
    case ExprKind::symbol: {
      const Symbol& s = e.symbol_ref();
      if (s.is_time()) {
        return Expr::sum({Expr::time(), Expr::product({Expr::integer(k), Expr::tau()})});
      }
      return Expr::symbol(Symbol::make(s.kind, s.index, s.offset + k));
    }
    case ExprKind::sum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(shift(c, k));
      return Expr::sum(std::move(parts));
    }
    case ExprKind::product: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(shift(c, k));
      return Expr::product(std::move(parts));
    }
    case ExprKind::power:
      return Expr::pow(shift(e.children().front(), k), e.exponent());
    case ExprKind::fn_sin:
      return Expr::sin(shift(e.children().front(), k));
    case ExprKind::fn_cos:
      return Expr::cos(shift(e.children().front(), k));
    case ExprKind::fn_exp:
      return Expr::exp(shift(e.children().front(), k));
    case ExprKind::fn_log:
      return Expr::log(shift(e.children().front(), k));
  }
  return e;
}

namespace {

Expr dt_unchecked(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
      return Expr::zero();
    case ExprKind::symbol: {
      const Symbol& s = e.symbol_ref();
      if (s.is_time()) return Expr::one();
      if (s.kind == SymKind::state) return Expr::state_dot(s.index, s.offset);
      return Expr::state_ddot(s.index, s.offset);  // state_dot -> state_ddot
    }
    case ExprKind::sum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(dt_unchecked(c));
      return Expr::sum(std::move(parts));
    }
    case ExprKind::product: {
      const auto& kids = e.children();
      std::vector<Expr> terms;
      terms.reserve(kids.size());
      for (std::size_t i = 0; i < kids.size(); ++i) {
        std::vector<Expr> factors;
        factors.reserve(kids.size());
        for (std::size_t j = 0; j < kids.size(); ++j) {
          factors.push_back(j == i ? dt_unchecked(kids[j]) : kids[j]);
        }
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case ExprKind::power: {
      const Expr& base = e.children().front();
      std::int64_t k = e.exponent();
      return Expr::product({Expr::integer(k), Expr::pow(base, k - 1), dt_unchecked(base)});
    }
    case ExprKind::fn_sin:
      return Expr::product({Expr::cos(e.children().front()), dt_unchecked(e.children().front())});
    case ExprKind::fn_cos:
      return Expr::product({Expr::integer(-1), Expr::sin(e.children().front()), dt_unchecked(e.children().front())});
    case ExprKind::fn_exp:
      return Expr::product({e, dt_unchecked(e.children().front())});
    case ExprKind::fn_log:
      return Expr::product({dt_unchecked(e.children().front()), Expr::pow(e.children().front(), -1)});
  }
  return Expr::zero();
}

}  // namespace

Expr total_time_derivative(const Expr& e) {
  for (const Symbol& s : symbols_of(e)) {
    switch (s.kind) {
      case SymKind::control:
      case SymKind::costate:
      case SymKind::costate_dot:
        throw EvalError("total time derivative of expression containing '" + s.name() +
                        "': control/costate conditions are checked numerically");
      case SymKind::state_ddot:
        throw EvalError("total time derivative of expression already containing '" + s.name() + "'");
      default:
        break;
    }
  }
  return dt_unchecked(e);
}

Expr simplify(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
    case ExprKind::symbol:
      return e;
    case ExprKind::sum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(simplify(c));
      return Expr::sum(std::move(parts));
    }
    case ExprKind::product: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(simplify(c));
      return Expr::product(std::move(parts));
    }
    case ExprKind::power:
      return Expr::pow(simplify(e.children().front()), e.exponent());
    case ExprKind::fn_sin:
      return Expr::sin(simplify(e.children().front()));
    case ExprKind::fn_cos:
      return Expr::cos(simplify(e.children().front()));
    case ExprKind::fn_exp:
      return Expr::exp(simplify(e.children().front()));
    case ExprKind::fn_log:
      return Expr::log(simplify(e.children().front()));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double pow_int_double(double base, std::int64_t k) {
  if (k < 0) {
    if (base == 0.0) throw EvalError("zero raised to a negative power");
    return 1.0 / pow_int_double(base, -k);
  }
  double acc = 1.0, b = base;
  std::int64_t e = k;
  while (e > 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

}  // namespace

double eval(const Expr& e, const Binding& binding) {
  switch (e.kind()) {
    case ExprKind::constant:
      return e.value().to_double();
    case ExprKind::tau:
      if (!binding.tau_value) throw EvalError("unbound symbol 'tau'");
      return *binding.tau_value;
    case ExprKind::symbol: {
      auto v = binding.get(e.symbol_ref());
      if (!v) throw EvalError("unbound symbol '" + e.symbol_ref().name() + "'");
      return *v;
    }
    case ExprKind::sum: {
      double acc = 0.0;
      for (const auto& c : e.children()) acc += eval(c, binding);
      return acc;
    }
    case ExprKind::product: {
      double acc = 1.0;
      for (const auto& c : e.children()) acc *= eval(c, binding);
      return acc;
    }
    case ExprKind::power:
      return pow_int_double(eval(e.children().front(), binding), e.exponent());
    case ExprKind::fn_sin:
      return std::sin(eval(e.children().front(), binding));
    case ExprKind::fn_cos:
      return std::cos(eval(e.children().front(), binding));
    case ExprKind::fn_exp:
      return std::exp(eval(e.children().front(), binding));
    case ExprKind::fn_log: {
      double v = eval(e.children().front(), binding);
      if (v <= 0.0) throw EvalError("log of non-positive value");
      return std::log(v);
    }
  }
  throw EvalError("unreachable expression kind");
}

Expr substitute(const Expr& e, const SymbolMap& replacements) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
      return e;
    case ExprKind::symbol: {
      auto it = replacements.find(e.symbol_ref());
      return it == replacements.end() ? e : it->second;
    }
    case ExprKind::sum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(substitute(c, replacements));
      return Expr::sum(std::move(parts));
    }
    case ExprKind::product: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const auto& c : e.children()) parts.push_back(substitute(c, replacements));
      return Expr::product(std::move(parts));
    }
    case ExprKind::power:
      return Expr::pow(substitute(e.children().front(), replacements), e.exponent());
    case ExprKind::fn_sin:
      return Expr::sin(substitute(e.children().front(), replacements));
    case ExprKind::fn_cos:
      return Expr::cos(substitute(e.children().front(), replacements));
    case ExprKind::fn_exp:
      return Expr::exp(substitute(e.children().front(), replacements));
    case ExprKind::fn_log:
      return Expr::log(substitute(e.children().front(), replacements));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

namespace {

void collect_symbols(const Expr& e, std::set<Symbol>& out) {
  if (e.kind() == ExprKind::symbol) {
    out.insert(e.symbol_ref());
    return;
  }
  for (const auto& c : e.children()) collect_symbols(c, out);
}

}  // namespace

std::set<Symbol> symbols_of(const Expr& e) {
  std::set<Symbol> out;
  collect_symbols(e, out);
  return out;
}

bool contains_kind(const Expr& e, SymKind kind) {
  if (e.kind() == ExprKind::symbol) return e.symbol_ref().kind == kind;
  for (const auto& c : e.children()) {
    if (contains_kind(c, kind)) return true;
  }
  return false;
}

bool is_polynomial(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
    case ExprKind::symbol:
      return true;
    case ExprKind::sum:
    case ExprKind::product:
      for (const auto& c : e.children()) {
        if (!is_polynomial(c)) return false;
      }
      return true;
    case ExprKind::power:
      return e.exponent() > 0 && is_polynomial(e.children().front());
    default:
      return false;
  }
}

int polynomial_degree(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::tau:
      return 0;
    case ExprKind::symbol:
      return e.symbol_ref().is_time() ? 0 : 1;
    case ExprKind::sum: {
      int deg = 0;
      for (const auto& c : e.children()) {
        int d = polynomial_degree(c);
        if (d < 0) return -1;
        deg = std::max(deg, d);
      }
      return deg;
    }
    case ExprKind::product: {
      int deg = 0;
      for (const auto& c : e.children()) {
        int d = polynomial_degree(c);
        if (d < 0) return -1;
        deg += d;
      }
      return deg;
    }
    case ExprKind::power: {
      if (e.exponent() <= 0) return -1;
      int d = polynomial_degree(e.children().front());
      if (d < 0) return -1;
      return static_cast<int>(e.exponent()) * d;
    }
    default:
      return -1;
  }
}

}  // namespace delvar
