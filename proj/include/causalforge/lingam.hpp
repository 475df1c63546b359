#pragma once

#include <vector>

#include "causalforge/graph.hpp"

namespace causalforge {

struct LingamResult {
  std::vector<int> causal_order;
  WeightedGraph weights; ///< edges only from earlier to later in causal_order
};

/// Maximum-entropy approximation of differential entropy for a standardized
/// variable:
///   H(u) ~ (1 + log 2pi)/2 - k1 (E[log cosh u] - gamma)^2 - k2 (E[u exp(-u^2/2)])^2
/// with k1 = 79.047, k2 = 7.4129, gamma = 0.37457.
double approximate_entropy(const Vector &u);

/// Likelihood-ratio measure between two standardized variables. Positive
/// values favour xi -> xj:
///   R = H(xj) + H(r_i|j) - H(xi) - H(r_j|i)
/// where r_b|a is the standardized residual of regressing x_b on x_a. The
/// measure is antisymmetric in its arguments. Throws DegenerateVariable for
/// (near) zero-variance input.
double pairwise_measure(const Vector &xi, const Vector &xj);

/// DirectLiNGAM: repeatedly pick as next root the remaining variable with
/// the smallest sum_j min(0, R(m, j))^2 and regress it out of the others;
/// then fit each variable on its predecessors and zero coefficients whose
/// two-sided t-test p-value exceeds `prune_alpha`.
LingamResult direct_lingam(const Matrix &x, double prune_alpha = 0.05);

} // namespace causalforge
