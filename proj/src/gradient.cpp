#include "causalforge/gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "causalforge/error.hpp"
#include "causalforge/numeric.hpp"
#include "causalforge/optimize.hpp"

namespace causalforge {

void NotearsConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(h_tol > 0.0) || !(rho_max > 0.0) || max_dual_iters < 1 ||
      !(w_threshold >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "NOTEARS parameters must be positive");
  }
}

void GolemConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || iterations < 1 || !(learning_rate > 0.0) ||
      !(w_threshold >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "GOLEM parameters must be positive");
  }
}

namespace {

Matrix sign_of(const Matrix &w) {
  return w.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

IntMatrix resolve_mask(const IntMatrix *mask, int d) {
  IntMatrix allowed = IntMatrix::Ones(d, d);
  if (mask) {
    if (mask->rows() != d || mask->cols() != d) throw Error(ErrorCode::kShapeError, "support mask has the wrong shape");
    allowed = (mask->array() != 0).cast<int>();
  }
  allowed.diagonal().setZero();
  return allowed;
}

void check_data(const Matrix &x) {
  if (x.rows() < 2) throw Error(ErrorCode::kInsufficientSamples, "need at least two samples");
  if (x.cols() < 1) throw Error(ErrorCode::kShapeError, "need at least one variable");
  if (!x.allFinite()) throw Error(ErrorCode::kNumericError, "data contains non-finite values");
}

// Smooth NOTEARS pieces from the Gram matrix C = X^T X / n.
struct NotearsParts {
  double loss;
  Matrix loss_grad;
  AcyclicityResult h;
};

NotearsParts notears_parts(const Matrix &gram, const Matrix &w) {
  const auto d = w.rows();
  const Matrix residual_op = Matrix::Identity(d, d) - w;
  const Matrix c_res = gram * residual_op;
  NotearsParts parts{0.5 * (residual_op.transpose() * c_res).trace(), -c_res, acyclicity_h(w)};
  return parts;
}

} // namespace

ObjectiveValue notears_objective(const Matrix &x_centered, const Matrix &w, double lambda1, double rho,
                                 double alpha) {
  const Matrix gram = x_centered.transpose() * x_centered / static_cast<double>(x_centered.rows());
  const auto parts = notears_parts(gram, w);
  ObjectiveValue out;
  out.value = parts.loss + lambda1 * w.cwiseAbs().sum() + 0.5 * rho * parts.h.value * parts.h.value +
              alpha * parts.h.value;
  out.gradient = parts.loss_grad + lambda1 * sign_of(w) + (rho * parts.h.value + alpha) * parts.h.gradient;
  return out;
}

GradientResult notears_linear(const Matrix &x, const NotearsConfig &cfg, const IntMatrix *support_mask,
                              const TraceSink &sink) {
  cfg.validate();
  check_data(x);
  const int d = static_cast<int>(x.cols());
  const Matrix xc = center_columns(x);
  const Matrix gram = xc.transpose() * xc / static_cast<double>(xc.rows());
  const IntMatrix allowed = resolve_mask(support_mask, d);
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;

  // Split W = W+ - W-, both non-negative, stacked column-major.
  Bounds bounds{Vector::Zero(2 * dd), Vector::Zero(2 * dd)};
  for (Eigen::Index k = 0; k < dd; ++k) {
    const double upper = allowed.data()[k] != 0 ? std::numeric_limits<double>::infinity() : 0.0;
    bounds.upper[k] = upper;
    bounds.upper[dd + k] = upper;
  }
  auto unpack = [&](const Vector &v) {
    return Matrix(Eigen::Map<const Matrix>(v.data(), d, d) - Eigen::Map<const Matrix>(v.data() + dd, d, d));
  };

  double rho = 1.0;
  double alpha = 0.0;
  double h = std::numeric_limits<double>::infinity();
  Vector estimate = Vector::Zero(2 * dd);
  GradientResult result;

  for (int iter = 0; iter < cfg.max_dual_iters; ++iter) {
    Vector candidate;
    double h_new = h;
    while (rho < cfg.rho_max) {
      const double rho_now = rho;
      const double alpha_now = alpha;
      const ObjectiveFn fn = [&](const Vector &v, Vector &grad) {
        const Matrix w = unpack(v);
        NotearsParts parts;
        try {
          parts = notears_parts(gram, w);
        } catch (const Error &e) {
          if (e.code() != ErrorCode::kNumericError) throw;
          return std::numeric_limits<double>::infinity();
        }
        const double hv = parts.h.value;
        const Matrix smooth = parts.loss_grad + (rho_now * hv + alpha_now) * parts.h.gradient;
        grad.head(dd) = Eigen::Map<const Vector>(smooth.data(), dd).array() + cfg.lambda1;
        grad.tail(dd) = -Eigen::Map<const Vector>(smooth.data(), dd).array() + cfg.lambda1;
        return parts.loss + 0.5 * rho_now * hv * hv + alpha_now * hv + cfg.lambda1 * v.sum();
      };
      Vector scratch(2 * dd);
      const double start_value = fn(estimate, scratch);
      const MinimizeResult solved = minimize_bounded(fn, estimate, bounds);
      candidate = solved.x;
      h_new = acyclicity_h(unpack(candidate)).value;
      result.inner_solves.push_back({rho_now, alpha_now, start_value, solved.f, h_new});
      if (h_new > 0.25 * h) {
        rho *= 10.0;
      } else {
        break;
      }
    }
    if (candidate.size() == 0) break;
    estimate = candidate;
    h = h_new;
    alpha += rho * h;

    const Matrix w = unpack(estimate);
    const auto parts = notears_parts(gram, w);
    TraceEntry entry{iter, parts.loss + cfg.lambda1 * w.cwiseAbs().sum(), h, rho};
    result.trace.push_back(entry);
    if (sink) sink(entry);
    if (h <= cfg.h_tol || rho >= cfg.rho_max) break;
  }

  Matrix w = unpack(estimate);
  w.diagonal().setZero();
  result.weights = WeightedGraph(std::move(w));
  result.h = acyclicity_h(result.weights.weights()).value;
  result.converged = result.h <= cfg.h_tol;
  return result;
}

ObjectiveValue golem_objective(const Matrix &x_centered, const Matrix &w, const GolemConfig &cfg) {
  const auto d = w.rows();
  const Matrix gram = x_centered.transpose() * x_centered;
  const Matrix residual_op = Matrix::Identity(d, d) - w;
  const Matrix c_res = gram * residual_op;

  const Eigen::PartialPivLU<Matrix> lu(residual_op);
  const double det = lu.determinant();
  if (!std::isfinite(det) || det == 0.0) {
    throw Error(ErrorCode::kNumericError, "I - W is singular");
  }

  ObjectiveValue out;
  if (cfg.equal_variance) {
    const double rss = (residual_op.transpose() * c_res).trace();
    out.value = 0.5 * static_cast<double>(d) * std::log(rss);
    out.gradient = -static_cast<double>(d) * c_res / rss;
  } else {
    out.value = 0.0;
    out.gradient = Matrix(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double rss_j = residual_op.col(j).dot(c_res.col(j));
      out.value += 0.5 * std::log(rss_j);
      out.gradient.col(j) = -c_res.col(j) / rss_j;
    }
  }
  out.value -= std::log(std::abs(det));
  out.gradient += lu.inverse().transpose();

  const auto h = acyclicity_h(w);
  out.value += cfg.lambda1 * w.cwiseAbs().sum() + cfg.lambda2 * h.value;
  out.gradient += cfg.lambda1 * sign_of(w) + cfg.lambda2 * h.gradient;
  return out;
}

GradientResult golem(const Matrix &x, const GolemConfig &cfg, const IntMatrix *support_mask,
                     const TraceSink &sink) {
  constexpr int kMaxHalvings = 20;
  constexpr int kTraceEvery = 100;

  cfg.validate();
  check_data(x);
  const int d = static_cast<int>(x.cols());
  const Matrix xc = center_columns(x);
  const Matrix allowed = resolve_mask(support_mask, d).cast<double>();

  GradientResult result;
  Matrix w = Matrix::Zero(d, d);
  ObjectiveValue current = golem_objective(xc, w, cfg);
  double step = cfg.learning_rate;

  auto emit = [&](int iteration) {
    TraceEntry entry{iteration, current.value, acyclicity_h(w).value, std::nullopt};
    result.trace.push_back(entry);
    if (sink) sink(entry);
  };

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    int halvings = 0;
    while (true) {
      const Matrix proposal = w - step * current.gradient.cwiseProduct(allowed);
      bool ok = proposal.allFinite();
      ObjectiveValue next;
      if (ok) {
        try {
          next = golem_objective(xc, proposal, cfg);
          ok = std::isfinite(next.value) && next.gradient.allFinite();
        } catch (const Error &) {
          ok = false;
        }
      }
      if (ok) {
        w = proposal;
        current = std::move(next);
        break;
      }
      if (++halvings > kMaxHalvings) {
        throw Error(ErrorCode::kNumericError,
                    "GOLEM step rejected " + std::to_string(kMaxHalvings) + " times at iteration " +
                        std::to_string(iter));
      }
      step *= 0.5;
    }
    if ((iter + 1) % kTraceEvery == 0 || iter + 1 == cfg.iterations) emit(iter + 1);
  }

  w.diagonal().setZero();
  result.weights = WeightedGraph(std::move(w));
  result.h = acyclicity_h(result.weights.weights()).value;
  result.converged = true;
  return result;
}

void remove_cycles_by_weight(Matrix &w, const IntMatrix *protected_edges) {
  while (true) {
    const IntMatrix support = (w.array() != 0.0).cast<int>();
    const auto cycle = find_directed_cycle(support);
    if (!cycle) return;
    int best_from = -1;
    int best_to = -1;
    double best = std::numeric_limits<double>::infinity();
    const auto &c = *cycle;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const int from = c[k];
      const int to = c[(k + 1) % c.size()];
      if (protected_edges && (*protected_edges)(from, to) != 0) continue;
      if (std::abs(w(from, to)) < best) {
        best = std::abs(w(from, to));
        best_from = from;
        best_to = to;
      }
    }
    if (best_from < 0) throw Error(ErrorCode::kPriorConflict, "a cycle consists only of protected edges");
    w(best_from, best_to) = 0.0;
  }
}

WeightedGraph threshold_weights(const WeightedGraph &w, double threshold, const IntMatrix *protected_edges) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "threshold must be non-negative");
  Matrix m = w.weights();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const bool keep = protected_edges && (*protected_edges)(i, j) != 0;
      if (!keep && std::abs(m(i, j)) < threshold) m(i, j) = 0.0;
    }
  }
  remove_cycles_by_weight(m, protected_edges);
  return WeightedGraph(std::move(m));
}

BinaryGraph threshold_and_repair(const WeightedGraph &w, double threshold) {
  return threshold_weights(w, threshold).support();
}

} // namespace causalforge
