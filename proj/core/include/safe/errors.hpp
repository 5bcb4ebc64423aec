#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace safe {

// Caller-supplied value violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input stream; `line` is the 1-based offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Cholesky factorization hit a pivot below the admissible range; `pivot` is
// the 0-based index of the failing diagonal.
class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : std::runtime_error("matrix is not positive semidefinite: pivot " +
                           std::to_string(pivot) + " is negative"),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

}  // namespace safe
