#pragma once

#include <stdexcept>
#include <string>

namespace jt {

// Invalid or inconsistent input configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside the mathematical domain of an operation, e.g. a
// non-Hermitian matrix handed to the eigensolver or a state outside the
// diagonalized parity sector (exit code 2 from the CLI).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Eigensolver failure, residual check failure, truncation loss (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Mean-field formula evaluated outside the region where it holds (exit code 4).
class ValidityDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// lambda_a == lambda_b > 1: first-order coexistence line, no unique phase.
class DegenerateBoundaryError : public ValidityDomainError {
 public:
  using ValidityDomainError::ValidityDomainError;
};

// Microcanonical shell contains no eigenstate (exit code 4).
class EmptyShellError : public std::runtime_error {
 public:
  EmptyShellError(const std::string& what, double nearest_distance)
      : std::runtime_error(what), nearest_distance_(nearest_distance) {}

  double nearest_distance() const noexcept { return nearest_distance_; }

 private:
  double nearest_distance_;
};

}  // namespace jt
