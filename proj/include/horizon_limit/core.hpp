#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace horizon_limit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Rejected problem data: unknown catalog id, out-of-range parameter,
/// inconsistent dimensions, or a point outside the admissible sets.
class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The ODE integrator could not reach the requested time.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double last_valid_time)
      : std::runtime_error(what + " (last valid t=" + std::to_string(last_valid_time) + ")"),
        last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// A payoff tail whose truncation error cannot be bounded.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root bracketing failed in the scalar shooter.
class ShootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace horizon_limit
