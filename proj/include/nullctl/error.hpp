#pragma once

#include <stdexcept>
#include <string>

namespace nullctl {

/// Input violates a documented precondition or config constraint (CLI exit 2).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation could not deliver its postcondition (CLI exit 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// greedy_nodes could not place the requested nodes; the caller should lower n.
class InfeasibleNodes : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A certificate chain too long to be of any practical use.
class DegenerateCertificate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Smallest eigenvalue of an observability form is not resolvably positive.
class UnobservableModes : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A query reaches past the computed part of a spectrum (J too small).
class SpectrumRangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace nullctl
