#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace itsurv {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, violated record invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad arguments or configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Newton iterations exhausted; carries the last iterate so callers can
// inspect how far the solve got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                   double score_norm)
      : Error(what),
        last_iterate(std::move(last_iterate)),
        score_norm(score_norm) {}

  std::vector<double> last_iterate;
  double score_norm = 0.0;
};

// Information matrix numerically singular; lists the aliased columns.
class SingularModelError : public Error {
 public:
  SingularModelError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns(std::move(columns)) {}

  std::vector<std::string> columns;
};

// Monotone likelihood: a coefficient diverged past the guard bound.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// A weight denominator underflowed; the positivity assumption failed.
class PositivityError : public Error {
 public:
  using Error::Error;
};

}  // namespace itsurv
