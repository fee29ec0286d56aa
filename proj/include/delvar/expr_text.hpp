#pragma once

#include <string>

#include "delvar/expr.hpp"

namespace delvar {

/// Render to the infix grammar used everywhere text is exchanged:
/// numbers (decimal, rational a/b, optional e-exponent), identifiers
/// t, tau, q<i>, dq<i>, ddq<i>, u<j>, p<i>, dp<i> with optional _tau/_adv
/// suffixes, operators + - * / ^ (integer exponents only), parentheses and
/// sin/cos/exp/log. render(parse(s)) parses back to a structurally equal
/// expression. (Numeric literals always parse to exact rationals when they
/// fit, so an expression holding an inexact constant - possible only after
/// an exact-arithmetic overflow - renders to its decimal expansion and
/// re-parses as the equal-valued rational.)
std::string render(const Expr& e);

/// Parse source text to a normalized expression. Errors carry line/column.
Expr parse_expr(const std::string& text);

}  // namespace delvar
