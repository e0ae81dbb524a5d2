#pragma once

#include <stdexcept>
#include <string>

namespace ubranch {

/// Argument outside the domain of an operation (precondition violation).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter record violates one of its invariants. `invariant()` names it.
class InvariantError : public std::invalid_argument {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::invalid_argument(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// Birth-death formula evaluated at lambda == mu, where it is singular.
class UnsupportedCriticalCase : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reading or writing an output or config file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ubranch
