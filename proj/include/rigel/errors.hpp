// Exception types shared across the library. Argument and range violations use
// the standard std::invalid_argument / std::out_of_range.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rigel {

/// Malformed edge-list input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary or text file with a bad magic, inconsistent header or truncated body.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Landmark bootstrap could not proceed (e.g. landmarks in different components).
class BootstrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query touching a node that has no coordinate.
class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Objective returned a non-finite value during minimization.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rigel
