#pragma once

#include <stdexcept>
#include <string>

namespace varbif {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: grid sizes, config files, unknown builtins, tolerances.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An integrand callback threw, returned a non-finite value, or failed a consistency probe.
class IntegrandError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of an operation does not hold at the given data.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A classification route's preconditions fail (e.g. an eigenspace is not
/// invariant under the Hessian of the leading functional).
class ClassificationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Iterative procedure (Newton, path tracking, refinement) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant violated (singular gram, non-symmetric assembly, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace varbif
