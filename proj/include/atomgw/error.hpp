#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atomgw {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or configuration violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario or sequence text; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A numerical procedure failed at run time (no root, no convergence,
/// vertex collision, open interferometer).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace atomgw
