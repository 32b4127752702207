#pragma once

#include <stdexcept>
#include <string>

namespace gsom {

/// Argument outside the admissible state space (density, attribute range).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Requested flux exceeds the maximal flux of the curve.
class InfeasibleFlux : public DomainError {
public:
  using DomainError::DomainError;
};

/// Root finder failed to bracket or converge.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Junction description violates its invariants.
class SpecError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Caller violated a documented precondition (e.g. non-colliding fronts).
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// A constructed solution broke an internal invariant.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace gsom
