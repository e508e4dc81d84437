#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saddle3 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dense Cholesky hit a nonpositive pivot.
class NotSPD : public Error {
 public:
  NotSPD(const std::string& what, std::size_t pivot)
      : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

// Incomplete Cholesky produced a nonpositive diagonal.
class BreakdownNonpositivePivot : public Error {
 public:
  BreakdownNonpositivePivot(std::size_t column, double value)
      : Error("incomplete Cholesky breakdown at column " + std::to_string(column) +
              " (pivot " + std::to_string(value) + ")"),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class NotSupported : public Error {
 public:
  using Error::Error;
};

class HypothesisViolated : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class UnsupportedField : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace saddle3
