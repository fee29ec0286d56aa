#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>

#include "delvar/errors.hpp"

namespace delvar {

/// Scalar constant of the expression language: an exact int64 rational while
/// possible, a double once arithmetic overflows the exact range. Literals
/// parsed from text always start exact so symbolic cancellation is not
/// defeated by rounding; doubles normally appear only after eval().
class Number {
 public:
  Number() : exact_(true), num_(0), den_(1), value_(0.0) {}

  static Number integer(std::int64_t n) { return Number(n, 1); }

  static Number rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw EvalError("rational with zero denominator");
    return Number(num, den);
  }

  static Number real(double v) {
    Number r;
    r.exact_ = false;
    r.value_ = v;
    return r;
  }

  bool exact() const { return exact_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : value_; }

  bool is_zero() const { return exact_ ? num_ == 0 : value_ == 0.0; }
  bool is_one() const { return exact_ ? (num_ == 1 && den_ == 1) : value_ == 1.0; }
  bool is_minus_one() const { return exact_ ? (num_ == -1 && den_ == 1) : value_ == -1.0; }
  bool is_negative() const { return exact_ ? num_ < 0 : value_ < 0.0; }

  friend Number operator+(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
      __int128 d = i128(a.den_) * b.den_;
      return from_i128(n, d, a.to_double() + b.to_double());
    }
    return real(a.to_double() + b.to_double());
  }

  friend Number operator-(const Number& a, const Number& b) { return a + b.negated(); }

  friend Number operator*(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      __int128 n = i128(a.num_) * b.num_;
      __int128 d = i128(a.den_) * b.den_;
      return from_i128(n, d, a.to_double() * b.to_double());
    }
    return real(a.to_double() * b.to_double());
  }

  Number negated() const {
    if (exact_) return Number(-num_, den_);
    return real(-value_);
  }

  Number reciprocal() const {
    if (is_zero()) throw EvalError("division by zero constant");
    if (exact_) return Number(den_, num_);
    return real(1.0 / value_);
  }

  Number pow_int(std::int64_t k) const {
    if (k == 0) return integer(1);
    if (k < 0) return reciprocal().pow_int(-k);
    Number acc = integer(1);
    Number base = *this;
    std::int64_t e = k;
    while (e > 0) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  /// Positive gcd of two exact rationals: gcd of numerators over lcm of
  /// denominators. Used to pull the numeric content out of a sum.
  static Number content_gcd(const Number& a, const Number& b) {
    std::int64_t gn = std::gcd(a.num_ < 0 ? -a.num_ : a.num_, b.num_ < 0 ? -b.num_ : b.num_);
    __int128 l = i128(a.den_) / std::gcd(a.den_, b.den_) * b.den_;
    if (gn == 0) gn = 1;
    if (l > INT64_MAX) return integer(1);
    return Number(gn, static_cast<std::int64_t>(l));
  }

  static int compare(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_) {
      __int128 lhs = i128(a.num_) * b.den_;
      __int128 rhs = i128(b.num_) * a.den_;
      if (lhs < rhs) return -1;
      if (lhs > rhs) return 1;
      return 0;
    }
    double x = a.to_double(), y = b.to_double();
    if (x < y) return -1;
    if (x > y) return 1;
    if (a.exact_ != b.exact_) return a.exact_ ? -1 : 1;
    return 0;
  }

  friend bool operator==(const Number& a, const Number& b) {
    if (a.exact_ != b.exact_) return false;
    return a.exact_ ? (a.num_ == b.num_ && a.den_ == b.den_) : a.value_ == b.value_;
  }

  std::string str() const {
    if (exact_) {
      if (den_ == 1) return std::to_string(num_);
      return std::to_string(num_) + "/" + std::to_string(den_);
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

 private:
  Number(std::int64_t num, std::int64_t den) : exact_(true), value_(0.0) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    num_ = num;
    den_ = den;
  }

  static __int128 i128(std::int64_t v) { return static_cast<__int128>(v); }

  static Number from_i128(__int128 n, __int128 d, double fallback) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 an = n < 0 ? -n : n;
    __int128 g = gcd128(an, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) return real(fallback);
    return Number(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  bool exact_;
  std::int64_t num_, den_;
  double value_;
};

}  // namespace delvar
