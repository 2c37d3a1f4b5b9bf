#pragma once

#include <stdexcept>
#include <string>

namespace leafsym {

/// Chart mismatch, wrong degree, malformed frame and similar misuse.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A point or parameter outside the admissible domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative solve (Newton, sampling retry loop) did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Construction of a certified object failed one of its invariants.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A suite configuration could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace leafsym
