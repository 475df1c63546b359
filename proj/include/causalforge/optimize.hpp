#pragma once

#include <functional>
#include <limits>

#include "causalforge/error.hpp"
#include "causalforge/graph.hpp"

namespace causalforge {

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized to x).
using ObjectiveFn = std::function<double(const Vector &x, Vector &grad)>;

struct Bounds {
  Vector lower;
  Vector upper;

  static Bounds unbounded(Eigen::Index m) {
    return {Vector::Constant(m, -std::numeric_limits<double>::infinity()),
            Vector::Constant(m, std::numeric_limits<double>::infinity())};
  }
};

struct MinimizeOptions {
  double projected_gradient_tol = 1e-6;
  int max_iterations = 500;
  int memory = 10;
  /// Optional relative-decrease stop, (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= ftol.
  /// Zero disables it.
  double ftol = 0.0;
};

struct MinimizeResult {
  Vector x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

/// Raised when the objective returns a non-finite value or gradient.
/// Carries the last iterate at which the objective was finite.
class OptimizationError : public Error {
public:
  OptimizationError(const std::string &message, Vector last_x, double last_f)
      : Error(ErrorCode::kNumericError, message), last_x_(std::move(last_x)), last_f_(last_f) {}

  const Vector &last_iterate() const noexcept { return last_x_; }
  double last_value() const noexcept { return last_f_; }

private:
  Vector last_x_;
  double last_f_;
};

/// Box-constrained limited-memory quasi-Newton minimizer.
///
/// Each iteration fixes the variables sitting on a bound whose gradient
/// points outward, takes an L-BFGS direction in the remaining free
/// coordinates and backtracks along the projected path until the Armijo
/// condition holds. Stops when the infinity norm of the projected gradient
/// drops to `projected_gradient_tol` or after `max_iterations`. The returned
/// value never exceeds f(project(x0)).
MinimizeResult minimize_bounded(const ObjectiveFn &fn, const Vector &x0, const Bounds &bounds,
                                const MinimizeOptions &options = {});

} // namespace causalforge
