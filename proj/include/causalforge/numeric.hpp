#pragma once

#include <span>

#include "causalforge/graph.hpp"

namespace causalforge {

/// e^A by scaling and squaring with a diagonal Pade approximant
/// (degree 3..13 chosen from the 1-norm). Throws NumericError on
/// non-finite input or output.
Matrix matrix_exponential(const Matrix &a);

struct AcyclicityResult {
  double value = 0.0;
  Matrix gradient;
};

/// h(W) = tr(exp(W o W)) - d and its gradient exp(W o W)^T o 2W.
AcyclicityResult acyclicity_h(const Matrix &w);

/// Column-centered copy of X.
Matrix center_columns(const Matrix &x);

/// Sample covariance of already-centered data with the 1/n normalization.
Matrix covariance(const Matrix &centered);

/// Partial correlation of variables i and j given `given`, read off the
/// inverse of the covariance submatrix on {i, j} U given. Throws
/// SingularCovariance when that submatrix is not positive definite.
double partial_correlation(const Matrix &cov, int i, int j, std::span<const int> given);

struct CiTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
};

/// Standard normal CDF through erfc.
double normal_cdf(double z);

/// Fisher-z test for zero partial correlation `r` estimated from n samples
/// with `conditioning_size` conditioning variables.
CiTestResult fisher_z_test(double r, long n, int conditioning_size, double alpha);

struct LeastSquaresFit {
  Vector coefficients;
  double residual_variance = 0.0; ///< RSS / n
};

/// No-intercept least squares. An empty design (k = 0) yields sum(y^2)/n.
/// Throws SingularDesign when n <= k or X is column-rank deficient.
LeastSquaresFit least_squares(const Matrix &x, const Vector &y);

} // namespace causalforge
