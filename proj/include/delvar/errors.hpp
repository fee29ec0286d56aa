#pragma once

#include <stdexcept>
#include <string>

namespace delvar {

/// Base error for the library. `category()` is a short machine-readable tag
/// ("parse", "validation", "eval", "bind", "solver", "io", "domain") used by
/// the CLI to format `error: <category>: <detail>` lines.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line = 0, int column = 0)
      : Error("parse", locate(message, line, column)), raw_(message), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& raw_message() const { return raw_; }

 private:
  static std::string locate(const std::string& m, int line, int column) {
    if (line <= 0) return m;
    return m + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }
  std::string raw_;
  int line_, column_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class EvalError : public Error {
 public:
  explicit EvalError(const std::string& message) : Error("eval", message) {}
};

class BindError : public Error {
 public:
  explicit BindError(const std::string& message) : Error("bind", message) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& message) : Error("solver", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace delvar
