#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chaining {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs with inconsistent shapes or memberships (matrix vs labels, cells vs tree, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A numeric or enumerated argument outside its allowed range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Unknown point label.
class LookupError : public Error {
 public:
  using Error::Error;
};

class DegenerateSpaceError : public Error {
 public:
  using Error::Error;
};

/// A logarithm of a zero mass: infinite code length or divergent integrand.
class InfiniteLengthError : public Error {
 public:
  using Error::Error;
};

/// An infinite series that does not converge for the supplied weights.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Covariance not PSD, or a factorization that fails after jitter escalation.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// One violated constraint found by a validator. Validators report, they do not throw.
struct Diagnostic {
  std::string kind;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace chaining
