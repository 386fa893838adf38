#pragma once

#include <stdexcept>
#include <string>

namespace castguard {

/// Base for every error the library raises. The CLI maps the three
/// subclasses to distinct exit codes (2, 3, 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, broken invariants, inconsistent configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, truncated or malformed input files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Fitting failed: degenerate training set, non-convergence, non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace castguard
