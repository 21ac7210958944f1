#pragma once

#include <stdexcept>
#include <string>

namespace preempt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range (negative cost, r <= mu, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A revenue-stream ordering required of the duopoly is violated. The message
/// names the inequality.
class InvalidOrdering : public Error {
 public:
  using Error::Error;
};

/// sigma = 0 together with mu <= 0: no finite investment threshold exists.
class DegenerateDynamics : public Error {
 public:
  using Error::Error;
};

/// A root bracket did not change sign, or an iteration did not converge.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The premise of an existence test does not hold (e.g. x_M^1 < x_F^2).
class PremiseViolated : public Error {
 public:
  using Error::Error;
};

/// A proposed threshold lies outside the admissible range.
class InvalidThreshold : public Error {
 public:
  using Error::Error;
};

/// The test is not defined for this parameter set.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// Lattice discretization is unusable (p_up outside (0, 1), bad counts).
class InvalidLattice : public Error {
 public:
  using Error::Error;
};

}  // namespace preempt
