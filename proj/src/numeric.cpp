#include "causalforge/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "causalforge/error.hpp"

namespace causalforge {

namespace {

// Pade coefficients b_0..b_m for the [m/m] approximant of exp.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norms for which the degree-m approximant is accurate to unit
// roundoff in double precision (Higham 2005, Table 2.3).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N> Matrix pade_low(const Matrix &a, const std::array<double, N> &b) {
  const auto n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix even = b[0] * ident;
  Matrix odd = b[1] * ident;
  Matrix power = ident;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    even += b[k] * power;
    if (k + 1 < N) odd += b[k + 1] * power;
  }
  const Matrix u = a * odd;
  return (even - u).partialPivLu().solve(even + u);
}

Matrix pade13(const Matrix &a) {
  const auto &b = kPade13;
  const auto n = a.rows();
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
           b[1] * ident);
  const Matrix v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
      b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

} // namespace

Matrix matrix_exponential(const Matrix &a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kShapeError, "matrix_exponential needs a square matrix");
  if (!a.allFinite()) throw Error(ErrorCode::kNumericError, "matrix_exponential input is not finite");
  if (a.size() == 0) return a;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  Matrix result;
  if (norm1 <= kTheta3) {
    result = pade_low(a, kPade3);
  } else if (norm1 <= kTheta5) {
    result = pade_low(a, kPade5);
  } else if (norm1 <= kTheta7) {
    result = pade_low(a, kPade7);
  } else if (norm1 <= kTheta9) {
    result = pade_low(a, kPade9);
  } else {
    int squarings = 0;
    if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    result = pade13(a * std::ldexp(1.0, -squarings));
    for (int s = 0; s < squarings; ++s) result = result * result;
  }
  if (!result.allFinite()) throw Error(ErrorCode::kNumericError, "matrix exponential overflowed");
  return result;
}

AcyclicityResult acyclicity_h(const Matrix &w) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::kShapeError, "acyclicity_h needs a square matrix");
  if (!w.allFinite()) throw Error(ErrorCode::kNumericError, "acyclicity_h input is not finite");
  const Matrix e = matrix_exponential(w.cwiseProduct(w));
  AcyclicityResult out;
  out.value = e.trace() - static_cast<double>(w.rows());
  out.gradient = e.transpose().cwiseProduct(2.0 * w);
  if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
    throw Error(ErrorCode::kNumericError, "acyclicity value overflowed");
  }
  // tr(exp(A)) >= d for A >= 0; rounding can dip a few ulps below.
  if (out.value < 0.0) out.value = 0.0;
  return out;
}

Matrix center_columns(const Matrix &x) { return x.rowwise() - x.colwise().mean(); }

Matrix covariance(const Matrix &centered) {
  const auto n = static_cast<double>(centered.rows());
  return (centered.transpose() * centered) / n;
}

double partial_correlation(const Matrix &cov, int i, int j, std::span<const int> given) {
  std::vector<int> idx{i, j};
  idx.insert(idx.end(), given.begin(), given.end());
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = cov(idx[a], idx[b]);
  }
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance,
                "covariance submatrix is not positive definite");
  }
  const Matrix precision = llt.solve(Matrix::Identity(k, k));
  const double denom = std::sqrt(precision(0, 0) * precision(1, 1));
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::kSingularCovariance, "degenerate precision matrix");
  }
  const double r = -precision(0, 1) / denom;
  return std::clamp(r, -1.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

CiTestResult fisher_z_test(double r, long n, int conditioning_size, double alpha) {
  const long dof = n - conditioning_size - 3;
  if (dof < 1) {
    throw Error(ErrorCode::kInsufficientSamples,
                "Fisher-z test needs n - |S| - 3 >= 1, got " + std::to_string(dof));
  }
  if (!std::isfinite(r) || std::abs(r) >= 1.0) {
    throw Error(ErrorCode::kNumericError, "partial correlation must satisfy |r| < 1");
  }
  CiTestResult out;
  out.statistic = std::sqrt(static_cast<double>(dof)) * std::abs(std::atanh(r));
  // 2 * (1 - Phi(z)) == erfc(z / sqrt 2), without cancellation in the tail.
  out.p_value = std::clamp(std::erfc(out.statistic / std::sqrt(2.0)), 0.0, 1.0);
  out.independent = out.p_value > alpha;
  return out;
}

LeastSquaresFit least_squares(const Matrix &x, const Vector &y) {
  if (x.rows() != y.size()) throw Error(ErrorCode::kShapeError, "least_squares: row count mismatch");
  const auto n = x.rows();
  const auto k = x.cols();
  LeastSquaresFit fit;
  if (n == 0) throw Error(ErrorCode::kSingularDesign, "least_squares: no observations");
  if (k == 0) {
    fit.coefficients = Vector(0);
    fit.residual_variance = y.squaredNorm() / static_cast<double>(n);
    return fit;
  }
  if (n <= k) throw Error(ErrorCode::kSingularDesign, "least_squares needs n > k");
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < k) throw Error(ErrorCode::kSingularDesign, "design matrix is rank deficient");
  fit.coefficients = qr.solve(y);
  fit.residual_variance = (y - x * fit.coefficients).squaredNorm() / static_cast<double>(n);
  return fit;
}

} // namespace causalforge
