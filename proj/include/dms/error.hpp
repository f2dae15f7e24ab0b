#pragma once

#include <stdexcept>
#include <string>

namespace dms {

/// A documented precondition was violated by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An adaptive engine exhausted its work budget before meeting tolerance.
/// Carries the best value reached and its error estimate.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_value, double error_estimate)
      : std::runtime_error(what), best_value_(best_value), error_estimate_(error_estimate) {}

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_value_;
  double error_estimate_;
};

/// The contraction rate K(v) = k01 + k10 fell below the guard threshold.
class DegenerateContraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dms
