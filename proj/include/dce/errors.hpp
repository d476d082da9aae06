#pragma once

#include <stdexcept>
#include <string>

namespace dce {

/// Input outside an operation's mathematical domain (negative squeezing,
/// transmissivity above one, ...). Maps to CLI exit code 2.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical step could not be completed. Carries the offending value
/// when one exists (e.g. a negative radicand). Maps to CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double value = 0.0)
      : std::runtime_error(what), value_(value) {}

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Flux sits on (or a modulation range crosses) a half-integer flux quantum.
class SingularInductanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Least-squares fit could not be formed (degenerate or insufficient data).
class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// No column of a flux-pump map crossed the detection threshold.
class OnsetNotFoundError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Covariance matrix is indefinite beyond the sampling tolerance.
class SamplingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed or mismatched configuration/metadata. Exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written. Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dce
