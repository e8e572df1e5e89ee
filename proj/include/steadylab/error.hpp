#pragma once

#include <stdexcept>
#include <string>

namespace steadylab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was not met.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Fields defined on different lattices were combined.
class LatticeMismatch : public PreconditionError {
 public:
  LatticeMismatch() : PreconditionError("lattice mismatch between operands") {}
};

/// Explicit advection step exceeds the CFL limit.
class CflError : public Error {
 public:
  using Error::Error;
};

/// An iteration (inner Picard loop or outer fixed-point loop) stopped contracting.
class ContractionError : public Error {
 public:
  using Error::Error;
};

/// The energy budget M was exceeded by an outer iterate.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared in a time integration.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

/// File or directory I/O failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration document rejected.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace steadylab
