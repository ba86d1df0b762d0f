#pragma once

#include <stdexcept>
#include <string>

namespace ftwist {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad derivative request: invalid config or order overflow.
struct DiffError : Error {
  using Error::Error;
};

/// A function evaluation left the declared smooth domain (non-finite value,
/// stencil point outside the slit fiber, ...). Never silently clamped.
struct EvalDomainError : Error {
  using Error::Error;
};

/// A fundamental tensor failed positive-definiteness; carries the offending
/// minimum eigenvalue.
struct DegeneracyError : Error {
  DegeneracyError(const std::string& what, double min_eig)
      : Error(what), min_eigenvalue(min_eig) {}
  double min_eigenvalue = 0.0;
};

/// Invariant violation while building a metric/twist from a spec.
struct ConstructionError : Error {
  using Error::Error;
};

/// Malformed run configuration (CLI).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ftwist
