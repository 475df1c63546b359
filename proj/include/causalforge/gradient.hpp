#pragma once

#include <vector>

#include "causalforge/graph.hpp"
#include "causalforge/trace.hpp"

namespace causalforge {

struct NotearsConfig {
  double lambda1 = 0.1;
  double h_tol = 1e-8;
  double rho_max = 1e16;
  int max_dual_iters = 100;
  double w_threshold = 0.3;

  void validate() const;
};

struct GolemConfig {
  double lambda1 = 2e-2;
  double lambda2 = 5.0;
  bool equal_variance = true;
  int iterations = 10000;
  double learning_rate = 1e-3;
  double w_threshold = 0.3;

  void validate() const;
};

/// One inner minimization of the augmented Lagrangian at fixed (rho, alpha).
struct InnerSolve {
  double rho = 0.0;
  double alpha = 0.0;
  double start_value = 0.0;
  double end_value = 0.0;
  double h = 0.0;
};

struct GradientResult {
  WeightedGraph weights; ///< dense, before thresholding
  double h = 0.0;
  bool converged = false;
  std::vector<TraceEntry> trace;
  std::vector<InnerSolve> inner_solves; ///< NOTEARS only
};

/// Value and gradient of a smooth objective in W.
struct ObjectiveValue {
  double value = 0.0;
  Matrix gradient;
};

/// The NOTEARS augmented Lagrangian
///   (1/2n)||X - XW||^2 + lambda1 |W|_1 + (rho/2) h(W)^2 + alpha h(W)
/// for centered X, with the L1 subgradient sign(W).
ObjectiveValue notears_objective(const Matrix &x_centered, const Matrix &w, double lambda1, double rho,
                                 double alpha);

/// GOLEM score L(W) + lambda1 |W|_1 + lambda2 h(W) for centered X, with
/// L = (d/2) log ||X - XW||^2 - log|det(I - W)| under equal variances and
/// L = (1/2) sum_j log ||x_j - X w_j||^2 - log|det(I - W)| otherwise.
ObjectiveValue golem_objective(const Matrix &x_centered, const Matrix &w, const GolemConfig &cfg);

/// Linear NOTEARS. `support_mask` (optional, 0/1) pins W_ij = 0 wherever the
/// mask is 0. Each dual update is reported to `sink` and kept in the trace.
GradientResult notears_linear(const Matrix &x, const NotearsConfig &cfg,
                              const IntMatrix *support_mask = nullptr, const TraceSink &sink = {});

/// GOLEM by fixed-step gradient descent from W = 0, halving the step when it
/// would make I - W singular or the score non-finite.
GradientResult golem(const Matrix &x, const GolemConfig &cfg, const IntMatrix *support_mask = nullptr,
                     const TraceSink &sink = {});

/// Delete the smallest-|weight| unprotected edge of some directed cycle until
/// the support is acyclic. Throws PriorConflict if a cycle consists only of
/// protected edges.
void remove_cycles_by_weight(Matrix &w, const IntMatrix *protected_edges = nullptr);

/// Zero every |W_ij| < threshold (protected edges excepted), then break cycles
/// with remove_cycles_by_weight. The result is a DAG.
WeightedGraph threshold_weights(const WeightedGraph &w, double threshold,
                                const IntMatrix *protected_edges = nullptr);

/// Support of threshold_weights.
BinaryGraph threshold_and_repair(const WeightedGraph &w, double threshold);

} // namespace causalforge
