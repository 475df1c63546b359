#include "causalforge/metrics.hpp"

#include <algorithm>

#include "causalforge/error.hpp"

namespace causalforge {

EdgeCounts count_edges(const IntMatrix &estimate, const BinaryGraph &truth) {
  const int d = truth.size();
  if (estimate.rows() != d || estimate.cols() != d) {
    throw Error(ErrorCode::kShapeError, "estimate and truth differ in size");
  }
  if (!is_dag(truth)) throw Error(ErrorCode::kNotADag, "true graph must be acyclic");
  for (int i = 0; i < d; ++i) {
    if (estimate(i, i) != 0) throw Error(ErrorCode::kInvalidGraph, "estimate has a self loop");
  }

  const IntMatrix &t = truth.adjacency();
  EdgeCounts c;
  c.true_edges = truth.num_edges();
  c.negatives = d * (d - 1) / 2 - c.true_edges;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const bool est_ij = estimate(i, j) != 0;
      const bool est_ji = estimate(j, i) != 0;
      const bool true_ij = t(i, j) != 0;
      const bool true_ji = t(j, i) != 0;
      const bool truly_adjacent = true_ij || true_ji;
      if (!est_ij && !est_ji) {
        if (truly_adjacent) ++c.false_negative;
        continue;
      }
      ++c.predicted;
      if (!truly_adjacent) {
        ++c.false_positive;
      } else if (est_ij && est_ji) {
        ++c.true_positive;
      } else if ((est_ij && true_ij) || (est_ji && true_ji)) {
        ++c.true_positive;
      } else {
        ++c.reversed;
      }
    }
  }
  return c;
}

double gscore(const EdgeCounts &counts) {
  return std::max(0, counts.true_positive - counts.false_positive) /
         static_cast<double>(std::max(1, counts.true_edges));
}

MetricsReport evaluate(const IntMatrix &estimate, const BinaryGraph &truth) {
  const EdgeCounts c = count_edges(estimate, truth);
  const double errors = c.reversed + c.false_positive;
  MetricsReport r;
  r.nnz = c.predicted;
  r.fdr = errors / std::max(1, c.predicted);
  r.tpr = c.true_positive / static_cast<double>(std::max(1, c.true_edges));
  r.fpr = errors / std::max(1, c.negatives);
  r.precision = c.true_positive / static_cast<double>(std::max(1, c.predicted));
  r.recall = r.tpr;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.shd = c.false_positive + c.false_negative + c.reversed;
  r.gscore = gscore(c);
  return r;
}

} // namespace causalforge
