#include "causalforge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace causalforge {

namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

Vector project(const Vector &x, const Bounds &bounds) {
  return x.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

// -H*g restricted to the free coordinates via the two-loop recursion.
Vector lbfgs_direction(const Vector &grad, const Eigen::Array<bool, Eigen::Dynamic, 1> &free,
                       const std::deque<CurvaturePair> &memory) {
  const Vector mask = free.cast<double>().matrix();
  Vector q = grad.cwiseProduct(mask);
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const auto &p = memory[k];
    alpha[k] = p.rho * p.s.cwiseProduct(mask).dot(q);
    q -= alpha[k] * p.y.cwiseProduct(mask);
  }
  double gamma = 1.0;
  if (!memory.empty()) {
    const auto &last = memory.back();
    gamma = last.s.dot(last.y) / last.y.squaredNorm();
  }
  Vector r = gamma * q;
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const auto &p = memory[k];
    const double beta = p.rho * p.y.cwiseProduct(mask).dot(r);
    r += (alpha[k] - beta) * p.s.cwiseProduct(mask);
  }
  return -r.cwiseProduct(mask);
}

} // namespace

MinimizeResult minimize_bounded(const ObjectiveFn &fn, const Vector &x0, const Bounds &bounds,
                                const MinimizeOptions &options) {
  const auto m = x0.size();
  if (bounds.lower.size() != m || bounds.upper.size() != m) {
    throw Error(ErrorCode::kShapeError, "bounds size does not match x0");
  }
  if ((bounds.lower.array() > bounds.upper.array()).any()) {
    throw Error(ErrorCode::kInvalidConfig, "lower bound exceeds upper bound");
  }

  MinimizeResult result;
  Vector x = project(x0, bounds);
  Vector g = Vector::Zero(m);
  double f = fn(x, g);
  ++result.evaluations;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw OptimizationError("objective is not finite at the starting point", x, f);
  }

  std::deque<CurvaturePair> memory;
  Vector trial_grad = Vector::Zero(m);
  double pg_norm = 0.0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    pg_norm = m == 0 ? 0.0 : (x - project(x - g, bounds)).cwiseAbs().maxCoeff();
    if (pg_norm <= options.projected_gradient_tol) {
      result.converged = true;
      break;
    }
    result.iterations = iter + 1;

    const Eigen::Array<bool, Eigen::Dynamic, 1> free =
        !(((x.array() <= bounds.lower.array()) && (g.array() > 0.0)) ||
          ((x.array() >= bounds.upper.array()) && (g.array() < 0.0)));

    Vector direction = lbfgs_direction(g, free, memory);
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -g.cwiseProduct(free.cast<double>().matrix());
      slope = g.dot(direction);
    }
    if (!(slope < 0.0)) break;

    double step = 1.0;
    if (memory.empty()) step = std::min(1.0, 1.0 / direction.cwiseAbs().maxCoeff());

    bool accepted = false;
    Vector trial;
    double trial_f = f;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = project(x + step * direction, bounds);
      const Vector s = trial - x;
      if (s.squaredNorm() == 0.0) break;
      trial_f = fn(trial, trial_grad);
      ++result.evaluations;
      if (!std::isfinite(trial_f) || !trial_grad.allFinite()) continue;
      if (trial_f <= f + 1e-4 * g.dot(s)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!std::isfinite(trial_f) || !trial_grad.allFinite()) {
        throw OptimizationError("objective became non-finite during line search", x, f);
      }
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      break;
    }

    Vector s = trial - x;
    Vector y = trial_grad - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * y.squaredNorm()) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }

    const double decrease = f - trial_f;
    const double scale = std::max({std::abs(f), std::abs(trial_f), 1.0});
    x = std::move(trial);
    f = trial_f;
    g = trial_grad;
    if (options.ftol > 0.0 && decrease <= options.ftol * scale) {
      pg_norm = (x - project(x - g, bounds)).cwiseAbs().maxCoeff();
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    pg_norm = m == 0 ? 0.0 : (x - project(x - g, bounds)).cwiseAbs().maxCoeff();
    result.converged = pg_norm <= options.projected_gradient_tol;
  }

  result.x = std::move(x);
  result.f = f;
  result.projected_gradient_norm = pg_norm;
  return result;
}

} // namespace causalforge
