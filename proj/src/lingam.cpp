#include "causalforge/lingam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "causalforge/error.hpp"
#include "causalforge/numeric.hpp"

namespace causalforge {

namespace {

constexpr double kK1 = 79.047;
constexpr double kK2 = 7.4129;
constexpr double kGamma = 0.37457;
constexpr double kMinVariance = 1e-12;

double population_sd(const Vector &v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

Vector standardize(const Vector &v) {
  const double sd = population_sd(v);
  if (!(sd * sd > kMinVariance)) throw Error(ErrorCode::kDegenerateVariable, "variable has zero variance");
  return (v.array() - v.mean()) / sd;
}

// Residual of regressing `target` on `regressor` (both centered) with the
// 1/n covariance convention.
Vector residual(const Vector &target, const Vector &regressor) {
  const double var = regressor.squaredNorm();
  if (!(var > 0.0)) throw Error(ErrorCode::kDegenerateVariable, "regressor has zero variance");
  return target - (target.dot(regressor) / var) * regressor;
}

} // namespace

double approximate_entropy(const Vector &u) {
  const double n = static_cast<double>(u.size());
  // log cosh u = |u| + log1p(exp(-2|u|)) - log 2, stable for large |u|
  const double log_cosh =
      (u.array().abs() + (-2.0 * u.array().abs()).exp().log1p() - std::numbers::ln2).sum() / n;
  const double gauss_moment = (u.array() * (-0.5 * u.array().square()).exp()).sum() / n;
  return 0.5 * (1.0 + std::log(2.0 * std::numbers::pi)) - kK1 * (log_cosh - kGamma) * (log_cosh - kGamma) -
         kK2 * gauss_moment * gauss_moment;
}

double pairwise_measure(const Vector &xi, const Vector &xj) {
  if (xi.size() != xj.size()) throw Error(ErrorCode::kShapeError, "pairwise_measure length mismatch");
  const Vector si = standardize(xi);
  const Vector sj = standardize(xj);
  const Vector ri_j = standardize(residual(si, sj));
  const Vector rj_i = standardize(residual(sj, si));
  return approximate_entropy(sj) + approximate_entropy(ri_j) - approximate_entropy(si) -
         approximate_entropy(rj_i);
}

LingamResult direct_lingam(const Matrix &x, double prune_alpha) {
  if (!(prune_alpha > 0.0 && prune_alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "prune threshold must lie in (0, 1)");
  }
  if (!x.allFinite()) throw Error(ErrorCode::kNumericError, "data contains non-finite values");
  const int d = static_cast<int>(x.cols());
  const auto n = x.rows();
  LingamResult result;
  if (d == 0) return result;
  if (d == 1) {
    result.causal_order = {0};
    result.weights = WeightedGraph(1);
    return result;
  }
  if (n < 3) throw Error(ErrorCode::kInsufficientSamples, "DirectLiNGAM needs at least three samples");

  // Work on standardized columns; residualization happens in place.
  Matrix work(n, d);
  for (int j = 0; j < d; ++j) work.col(j) = standardize(x.col(j));

  std::vector<int> remaining(d);
  for (int j = 0; j < d; ++j) remaining[j] = j;

  while (remaining.size() > 1) {
    int root = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const int m : remaining) {
      double score = 0.0;
      for (const int j : remaining) {
        if (j == m) continue;
        const double r = std::min(0.0, pairwise_measure(work.col(m), work.col(j)));
        score += r * r;
      }
      if (score < best) {
        best = score;
        root = m;
      }
    }
    result.causal_order.push_back(root);
    std::erase(remaining, root);
    const Vector root_col = work.col(root);
    for (const int j : remaining) {
      const Vector r = residual(work.col(j), root_col);
      work.col(j) = standardize(r);
    }
  }
  result.causal_order.push_back(remaining.front());

  // Prune by t-tests on the least-squares fit of each variable on its
  // predecessors in the order.
  const Matrix xc = center_columns(x);
  Matrix w = Matrix::Zero(d, d);
  for (int pos = 1; pos < d; ++pos) {
    const int target = result.causal_order[pos];
    const int k = pos;
    if (n <= k + 1) throw Error(ErrorCode::kInsufficientSamples, "too few samples to prune");
    Matrix design(n, k);
    for (int a = 0; a < k; ++a) design.col(a) = xc.col(result.causal_order[a]);
    const auto fit = least_squares(design, xc.col(target));
    const double dof = static_cast<double>(n - k);
    const double sigma2 = fit.residual_variance * static_cast<double>(n) / dof;
    const Matrix gram_inv = (design.transpose() * design).inverse();
    boost::math::students_t dist(dof);
    for (int a = 0; a < k; ++a) {
      const double coef = fit.coefficients[a];
      const double se = std::sqrt(sigma2 * gram_inv(a, a));
      double p_value = 0.0;
      if (se > 0.0) {
        const double t = std::abs(coef / se);
        p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      }
      if (p_value <= prune_alpha) w(result.causal_order[a], target) = coef;
    }
  }
  result.weights = WeightedGraph(std::move(w));
  return result;
}

} // namespace causalforge
