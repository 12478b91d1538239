#pragma once

#include <stdexcept>
#include <string>

namespace polsar {

/// Input outside the mathematical domain of an operation (negative power,
/// |alpha| > 1, epsilon <= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration (scenario files, CLI flags).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Not enough effective samples to form a statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures in the CLI layer.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polsar
