#include "delvar/expr_text.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace delvar {

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

enum Prec { prec_sum = 0, prec_product = 1, prec_power = 2, prec_atom = 3 };

std::string render_prec(const Expr& e, int parent_prec);

std::string wrap(const std::string& s, bool need) { return need ? "(" + s + ")" : s; }

std::string render_factor(const Expr& e) {
  // A factor inside a product: sums need parentheses.
  return render_prec(e, prec_product);
}

std::string render_product(const Expr& e, int parent_prec) {
  // Split into numerator and denominator by exponent sign.
  std::vector<std::string> numer, denom;
  Number coeff = Number::integer(1);
  bool have_coeff = false;
  for (const auto& k : e.children()) {
    if (k.kind() == ExprKind::constant) {
      coeff = k.value();
      have_coeff = true;
      continue;
    }
    if (k.kind() == ExprKind::power && k.exponent() < 0) {
      const Expr& base = k.children().front();
      std::int64_t a = -k.exponent();
      denom.push_back(a == 1 ? render_prec(base, prec_power)
                             : render_prec(base, prec_atom) + "^" + std::to_string(a));
      continue;
    }
    numer.push_back(render_factor(k));
  }

  std::string head;
  bool negative = false;
  if (have_coeff) {
    Number c = coeff;
    if (c.is_negative()) {
      negative = true;
      c = c.negated();
    }
    if (!c.is_one() || numer.empty()) head = c.str();
  }

  std::string out = head;
  for (const auto& f : numer) {
    if (!out.empty()) out += "*";
    out += f;
  }
  if (out.empty()) out = "1";
  if (!denom.empty()) {
    if (denom.size() == 1) {
      out += "/" + denom.front();
    } else {
      std::string d = denom.front();
      for (std::size_t i = 1; i < denom.size(); ++i) d += "*" + denom[i];
      out += "/(" + d + ")";
    }
  }
  if (negative) {
    // The sign binds like a sum: parenthesize when embedded in a product.
    return wrap("-" + out, parent_prec > prec_sum);
  }
  return wrap(out, parent_prec > prec_product);
}

std::string render_sum(const Expr& e, int parent_prec) {
  std::string out;
  bool first = true;
  for (const auto& term : e.children()) {
    // Detect a negative leading coefficient to join with " - ".
    bool neg = false;
    Expr t = term;
    if (term.kind() == ExprKind::constant && term.value().is_negative()) {
      neg = true;
      t = Expr::constant(term.value().negated());
    } else if (term.kind() == ExprKind::product && term.children().front().kind() == ExprKind::constant &&
               term.children().front().value().is_negative()) {
      std::vector<Expr> kids;
      kids.push_back(Expr::constant(term.children().front().value().negated()));
      for (std::size_t i = 1; i < term.children().size(); ++i) kids.push_back(term.children()[i]);
      t = Expr::product(std::move(kids));
      neg = true;
    }
    std::string piece = render_prec(t, prec_product);
    if (first) {
      out = neg ? "-" + piece : piece;
      first = false;
    } else {
      out += neg ? " - " : " + ";
      out += piece;
    }
  }
  return wrap(out, parent_prec > prec_sum);
}

std::string render_prec(const Expr& e, int parent_prec) {
  switch (e.kind()) {
    case ExprKind::constant: {
      const Number& v = e.value();
      if (v.is_negative()) return wrap(v.str(), parent_prec > prec_sum);
      if (v.exact() && v.den() != 1) return wrap(v.str(), parent_prec > prec_product);
      return v.str();
    }
    case ExprKind::tau:
      return "tau";
    case ExprKind::symbol:
      return e.symbol_ref().name();
    case ExprKind::sum:
      return render_sum(e, parent_prec);
    case ExprKind::product:
      return render_product(e, parent_prec);
    case ExprKind::power: {
      std::int64_t k = e.exponent();
      if (k < 0) {
        std::string body = "1/" + (k == -1 ? render_prec(e.children().front(), prec_power)
                                           : render_prec(e.children().front(), prec_atom) + "^" + std::to_string(-k));
        return wrap(body, parent_prec > prec_product);
      }
      return render_prec(e.children().front(), prec_atom) + "^" + std::to_string(k);
    }
    case ExprKind::fn_sin:
      return "sin(" + render_prec(e.children().front(), prec_sum) + ")";
    case ExprKind::fn_cos:
      return "cos(" + render_prec(e.children().front(), prec_sum) + ")";
    case ExprKind::fn_exp:
      return "exp(" + render_prec(e.children().front(), prec_sum) + ")";
    case ExprKind::fn_log:
      return "log(" + render_prec(e.children().front(), prec_sum) + ")";
  }
  return "?";
}

}  // namespace

std::string render(const Expr& e) { return render_prec(e, prec_sum); }

// ---------------------------------------------------------------------------
// Parsing (recursive descent)
// ---------------------------------------------------------------------------

namespace {

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void skip_space() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\r' || src[pos] == '\n')) {
      advance();
    }
  }

  char peek() const { return pos < src.size() ? src[pos] : '\0'; }

  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line, col); }
};

struct Parser {
  Lexer lx;

  explicit Parser(const std::string& s) : lx(s) {}

  Expr parse() {
    Expr e = parse_sum();
    lx.skip_space();
    if (lx.peek() != '\0') lx.fail(std::string("unexpected character '") + lx.peek() + "'");
    return e;
  }

  Expr parse_sum() {
    Expr acc = parse_term();
    for (;;) {
      lx.skip_space();
      char c = lx.peek();
      if (c == '+') {
        lx.advance();
        acc = acc + parse_term();
      } else if (c == '-') {
        lx.advance();
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }

  Expr parse_term() {
    Expr acc = parse_unary();
    for (;;) {
      lx.skip_space();
      char c = lx.peek();
      if (c == '*') {
        lx.advance();
        acc = acc * parse_unary();
      } else if (c == '/') {
        lx.advance();
        Expr d = parse_unary();
        if (d.is_zero()) lx.fail("division by zero");
        acc = acc * Expr::pow(d, -1);
      } else {
        return acc;
      }
    }
  }

  Expr parse_unary() {
    lx.skip_space();
    if (lx.peek() == '-') {
      lx.advance();
      return -parse_unary();
    }
    if (lx.peek() == '+') {
      lx.advance();
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    lx.skip_space();
    if (lx.peek() != '^') return base;
    lx.advance();
    lx.skip_space();
    bool neg = false;
    if (lx.peek() == '-') {
      neg = true;
      lx.advance();
    }
    if (!std::isdigit(static_cast<unsigned char>(lx.peek()))) {
      lx.fail("exponent must be an integer literal");
    }
    std::int64_t k = 0;
    while (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
      k = k * 10 + (lx.peek() - '0');
      if (k > 1'000'000) lx.fail("exponent too large");
      lx.advance();
    }
    if (lx.peek() == '.') lx.fail("exponent must be an integer literal");
    if (neg) k = -k;
    if (base.is_zero() && k < 0) lx.fail("zero raised to a negative power");
    return Expr::pow(base, k);
  }

  Expr parse_atom() {
    lx.skip_space();
    char c = lx.peek();
    if (c == '(') {
      lx.advance();
      Expr e = parse_sum();
      lx.skip_space();
      if (lx.peek() != ')') lx.fail("expected ')'");
      lx.advance();
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (c == '\0') lx.fail("unexpected end of expression");
    lx.fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    int line = lx.line, col = lx.col;
    std::string digits;
    std::string frac;
    while (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
      digits += lx.peek();
      lx.advance();
    }
    if (lx.peek() == '.') {
      lx.advance();
      while (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
        frac += lx.peek();
        lx.advance();
      }
    }
    if (digits.empty() && frac.empty()) throw ParseError("malformed number", line, col);
    long exp10 = 0;
    if (lx.peek() == 'e' || lx.peek() == 'E') {
      lx.advance();
      bool neg = false;
      if (lx.peek() == '-') {
        neg = true;
        lx.advance();
      } else if (lx.peek() == '+') {
        lx.advance();
      }
      if (!std::isdigit(static_cast<unsigned char>(lx.peek()))) lx.fail("malformed exponent");
      while (std::isdigit(static_cast<unsigned char>(lx.peek()))) {
        exp10 = exp10 * 10 + (lx.peek() - '0');
        if (exp10 > 400) lx.fail("exponent out of range");
        lx.advance();
      }
      if (neg) exp10 = -exp10;
    }
    // Exact value: digits.frac * 10^exp10, kept rational while it fits.
    long shift10 = exp10 - static_cast<long>(frac.size());
    std::string mantissa = digits + frac;
    std::int64_t m = 0;
    bool overflow = mantissa.size() > 18;
    if (!overflow) {
      for (char d : mantissa) m = m * 10 + (d - '0');
    }
    if (!overflow && shift10 >= 0 && shift10 <= 18) {
      Number scale = Number::integer(10).pow_int(shift10);
      Number v = Number::integer(m) * scale;
      if (v.exact()) return Expr::constant(v);
    } else if (!overflow && shift10 < 0 && shift10 >= -18) {
      Number scale = Number::rational(1, 1);
      Number ten = Number::integer(10);
      scale = ten.pow_int(-shift10).reciprocal();
      Number v = Number::integer(m) * scale;
      if (v.exact()) return Expr::constant(v);
    }
    std::string text = digits.empty() ? "0" : digits;
    text += "." + (frac.empty() ? std::string("0") : frac) + "e" + std::to_string(exp10);
    return Expr::real(std::strtod(text.c_str(), nullptr));
  }

  Expr parse_identifier() {
    int line = lx.line, col = lx.col;
    std::string name;
    while (std::isalnum(static_cast<unsigned char>(lx.peek())) || lx.peek() == '_') {
      name += lx.peek();
      lx.advance();
    }
    if (name == "t") return Expr::time();
    if (name == "tau") return Expr::tau();
    if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
      lx.skip_space();
      if (lx.peek() != '(') throw ParseError("expected '(' after function name '" + name + "'", lx.line, lx.col);
      lx.advance();
      Expr arg = parse_sum();
      lx.skip_space();
      if (lx.peek() != ')') lx.fail("expected ')'");
      lx.advance();
      if (name == "sin") return Expr::sin(arg);
      if (name == "cos") return Expr::cos(arg);
      if (name == "exp") return Expr::exp(arg);
      return Expr::log(arg);
    }
    Symbol sym;
    if (!classify_symbol(name, sym)) {
      throw ParseError("unknown identifier '" + name + "'", line, col);
    }
    return Expr::symbol(sym);
  }

  static bool classify_symbol(const std::string& name, Symbol& out) {
    static const std::pair<const char*, SymKind> prefixes[] = {
        {"ddq", SymKind::state_ddot}, {"dq", SymKind::state_dot}, {"dp", SymKind::costate_dot},
        {"q", SymKind::state},        {"u", SymKind::control},    {"p", SymKind::costate},
    };
    for (const auto& [prefix, kind] : prefixes) {
      std::size_t n = std::string(prefix).size();
      if (name.size() <= n || name.compare(0, n, prefix) != 0) continue;
      std::size_t i = n;
      if (!std::isdigit(static_cast<unsigned char>(name[i]))) continue;
      int index = 0;
      while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
        index = index * 10 + (name[i] - '0');
        if (index > 1'000'000) return false;
        ++i;
      }
      if (index < 1) return false;
      int offset = 0;
      if (i < name.size()) {
        std::string suffix = name.substr(i);
        int magnitude = 1;
        std::string word;
        if (suffix.rfind("_tau", 0) == 0) {
          word = suffix.substr(4);
          offset = -1;
        } else if (suffix.rfind("_adv", 0) == 0) {
          word = suffix.substr(4);
          offset = 1;
        } else {
          return false;
        }
        if (!word.empty()) {
          for (char d : word) {
            if (!std::isdigit(static_cast<unsigned char>(d))) return false;
          }
          magnitude = std::atoi(word.c_str());
          if (magnitude < 2 || magnitude > 8) return false;
        }
        offset *= magnitude;
      }
      out = Symbol::make(kind, index, offset);
      return true;
    }
    return false;
  }
};

}  // namespace

Expr parse_expr(const std::string& text) {
  Parser p(text);
  return p.parse();
}

}  // namespace delvar
