#pragma once

#include <stdexcept>
#include <string>

namespace timelimits {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside the documented domain (bad action, NaN reward, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An object was used in a state its contract forbids, e.g. stepping a finished episode.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Transition model rows that are not probability distributions.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Trajectory batch missing data that the advantage estimator needs.
class InvalidBatch : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during optimisation. The message carries a diagnostics dump.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace timelimits
