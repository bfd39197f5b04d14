#pragma once

#include <stdexcept>
#include <string>

namespace shiftgen {

/// Invalid configuration: bad parameter values, unknown descriptors, schema violations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (e.g. path sites do not match a quadrature grid).
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown, e.g. a covariance matrix that stays indefinite after jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integral normalizer that should be strictly positive evaluated to zero.
class PositivityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every tilting weight in a resampling pool was zero.
class DegenerateTilting : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shiftgen
