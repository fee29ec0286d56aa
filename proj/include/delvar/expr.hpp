#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "delvar/number.hpp"
#include "delvar/symbol.hpp"

namespace delvar {

/// Node kinds of the expression tree. Negation and subtraction are not node
/// kinds: they normalize to products/sums with a -1 coefficient. Division
/// normalizes to integer powers with negative exponent.
enum class ExprKind { constant, tau, symbol, sum, product, power, fn_sin, fn_cos, fn_exp, fn_log };

/// Immutable symbolic expression over time-shifted trajectory symbols.
///
/// Values are handles to shared immutable nodes, safe to copy and share
/// between threads. All building blocks normalize on construction:
///   - constants fold (exact rational arithmetic while it fits in int64),
///   - nested sums/products flatten,
///   - sum terms with equal monomials collect (x - x cancels to the literal 0),
///   - products with equal bases merge into integer powers,
///   - sums raised to positive powers or multiplied into a product expand,
///     so polynomials reach one normal form on every derivation route
///     (reciprocals of sums are the only factored sums that remain, with
///     their numeric content pulled out).
/// simplify() re-runs this normalization bottom-up and is idempotent.
class Expr {
 public:
  struct Node;  // definition private to the implementation

  Expr() : Expr(integer(0)) {}

  // -- leaves -------------------------------------------------------------
  static Expr constant(const Number& v);
  static Expr integer(std::int64_t n) { return constant(Number::integer(n)); }
  static Expr rational(std::int64_t num, std::int64_t den) { return constant(Number::rational(num, den)); }
  static Expr real(double v) { return constant(Number::real(v)); }
  static Expr zero() { return integer(0); }
  static Expr one() { return integer(1); }
  static Expr tau();
  static Expr symbol(const Symbol& s);
  static Expr time() { return symbol(Symbol::time()); }
  static Expr state(int i, int offset = 0) { return symbol(Symbol::make(SymKind::state, i, offset)); }
  static Expr state_dot(int i, int offset = 0) { return symbol(Symbol::make(SymKind::state_dot, i, offset)); }
  static Expr state_ddot(int i, int offset = 0) { return symbol(Symbol::make(SymKind::state_ddot, i, offset)); }
  static Expr control(int j, int offset = 0) { return symbol(Symbol::make(SymKind::control, j, offset)); }
  static Expr costate(int i, int offset = 0) { return symbol(Symbol::make(SymKind::costate, i, offset)); }
  static Expr costate_dot(int i, int offset = 0) { return symbol(Symbol::make(SymKind::costate_dot, i, offset)); }

  // -- combinators ----------------------------------------------------------
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr pow(const Expr& base, std::int64_t exponent);
  static Expr sin(const Expr& arg);
  static Expr cos(const Expr& arg);
  static Expr exp(const Expr& arg);
  static Expr log(const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) { return sum({a, product({integer(-1), b})}); }
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator-(const Expr& a) { return product({integer(-1), a}); }

  // -- inspection -----------------------------------------------------------
  ExprKind kind() const;
  const Number& value() const;       // constant nodes
  const Symbol& symbol_ref() const;  // symbol nodes
  std::int64_t exponent() const;     // power nodes
  const std::vector<Expr>& children() const;

  bool is_constant() const { return kind() == ExprKind::constant; }
  bool is_zero() const { return is_constant() && value().is_zero(); }
  bool is_one() const { return is_constant() && value().is_one(); }

  /// Total structural order after canonicalization; defines the canonical
  /// child ordering of sums and products.
  static int compare(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  struct Less {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
  };

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend struct ExprBuilder;
};

/// Values for every symbol of an expression; evaluation of an unbound symbol
/// is an error, never a silent zero.
struct Binding {
  std::optional<double> time_value;
  std::optional<double> tau_value;
  std::vector<std::pair<Symbol, double>> values;

  void set(const Symbol& s, double v) {
    if (s.is_time()) {
      time_value = v;
      return;
    }
    for (auto& kv : values) {
      if (kv.first == s) {
        kv.second = v;
        return;
      }
    }
    values.emplace_back(s, v);
  }

  std::optional<double> get(const Symbol& s) const {
    if (s.is_time()) return time_value;
    for (const auto& kv : values) {
      if (kv.first == s) return kv.second;
    }
    return std::nullopt;
  }
};

using SymbolMap = std::map<Symbol, Expr>;

/// Partial derivative with respect to one slot symbol; result normalized.
Expr partial(const Expr& e, const Symbol& s);

/// Shift every symbol offset by k and replace explicit t by t + k*tau.
Expr shift(const Expr& e, int k);

/// d/dt along a trajectory: q -> dq, dq -> ddq, t -> 1, offsets preserved.
/// Errors on control/costate symbols (those conditions are checked
/// numerically) and on expressions already containing second derivatives.
Expr total_time_derivative(const Expr& e);

/// Bottom-up renormalization. Idempotent; returns the literal 0 when the
/// fixed rule set cancels everything.
Expr simplify(const Expr& e);

/// IEEE double evaluation; throws EvalError on unbound symbols and domain
/// errors (log of a non-positive value, 0 to a negative power).
double eval(const Expr& e, const Binding& binding);

/// Replace symbols by expressions (used for reduction arguments and tests).
Expr substitute(const Expr& e, const SymbolMap& replacements);

std::set<Symbol> symbols_of(const Expr& e);
bool contains_kind(const Expr& e, SymKind kind);

/// True when the expression is built only from +, *, and nonnegative integer
/// powers (no sin/cos/exp/log, no negative exponents).
bool is_polynomial(const Expr& e);

/// Total degree counting non-time symbols; 0 for constants, -1 if not
/// polynomial.
int polynomial_degree(const Expr& e);

}  // namespace delvar
