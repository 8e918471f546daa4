#pragma once

#include <stdexcept>
#include <string>

namespace eedc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid model configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A policy entry, level or state index outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Requested enumeration exceeds the configured size ceiling.
class GateError : public Error {
 public:
  using Error::Error;
};

/// A regime-specific result was asked for at a price outside that regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Factorization breakdown, singular system or failed post-condition.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Inputs that disagree with each other (e.g. an eta that is not the
/// average profit of the policy it is paired with).
class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// G + c has zero slope in the price, so no critical price exists.
class DegeneratePriceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace eedc
