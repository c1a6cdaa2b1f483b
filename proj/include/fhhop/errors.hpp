#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhhop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a belief update is asked for an observation whose probability
/// under the current belief is below the impossibility threshold.
class ImpossibleObservation : public Error {
 public:
  using Error::Error;
};

class ModelTooLarge : public Error {
 public:
  using Error::Error;
};

/// A model violates a stochasticity or consistency invariant. The message
/// names the first offending row.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A model or report file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// No expandable leaf remains in the search tree.
class ExhaustedTree : public Error {
 public:
  using Error::Error;
};

}  // namespace fhhop
