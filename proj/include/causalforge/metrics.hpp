#pragma once

#include "causalforge/graph.hpp"

namespace causalforge {

struct MetricsReport {
  double fdr = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  int shd = 0;
  int nnz = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double gscore = 0.0;

  friend bool operator==(const MetricsReport &, const MetricsReport &) = default;
};

/// Raw edge tallies behind a report.
struct EdgeCounts {
  int true_positive = 0;
  int reversed = 0;
  int false_positive = 0;
  int false_negative = 0;
  int predicted = 0; ///< undirected pairs counted once
  int true_edges = 0;
  int negatives = 0; ///< d(d-1)/2 - true_edges
};

EdgeCounts count_edges(const IntMatrix &estimate, const BinaryGraph &truth);

/// max(0, TP - FP) / max(1, |T|).
double gscore(const EdgeCounts &counts);

/// Compare an estimated DAG or CPDAG (symmetric pairs = undirected edges)
/// against a true DAG. Undirected estimated edges whose skeleton matches a
/// true edge count as true positives. All denominators are max(1, .).
/// Throws ShapeError on dimension mismatch and NotADag for cyclic truth.
MetricsReport evaluate(const IntMatrix &estimate, const BinaryGraph &truth);
inline MetricsReport evaluate(const BinaryGraph &estimate, const BinaryGraph &truth) {
  return evaluate(estimate.adjacency(), truth);
}
inline MetricsReport evaluate(const Cpdag &estimate, const BinaryGraph &truth) {
  return evaluate(estimate.adjacency(), truth);
}

} // namespace causalforge
