#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "causalforge/graph.hpp"
#include "causalforge/trace.hpp"

namespace causalforge {

struct GesConfig {
  double penalty_discount = 1.0;
  std::optional<int> max_parents; ///< unbounded when empty

  void validate() const;
};

/// Gaussian BIC of one node given its parents, from sufficient statistics:
///   -(n/2) log(sigma^2) - penalty_discount * ((|parents| + 1)/2) log n
/// with sigma^2 the 1/n residual variance of the regression, floored at 1e-12.
double bic_local(const Matrix &cov, long n, int node, std::span<const int> parents, const GesConfig &cfg);

/// Decomposable BIC with a cache keyed by (node, sorted parent set).
class BicScore {
public:
  BicScore(const Matrix &x, const GesConfig &cfg);
  BicScore(Matrix cov, long n, const GesConfig &cfg);

  int num_variables() const { return static_cast<int>(cov_.rows()); }
  double local(int node, std::vector<int> parents) const;
  double total(const BinaryGraph &dag) const;

private:
  Matrix cov_;
  long n_;
  GesConfig cfg_;
  mutable std::map<std::pair<int, std::vector<int>>, double> cache_;
};

enum class GesPhase { kForward, kBackward };

/// One accepted operator: Insert(from, to, subset) or Delete(from, to, subset).
struct GesStep {
  GesPhase phase = GesPhase::kForward;
  int from = 0;
  int to = 0;
  std::vector<int> subset;
  double delta = 0.0;
  double total_score = 0.0; ///< score of the CPDAG after the step
};

struct GesResult {
  Cpdag graph;
  double score = 0.0;
  std::vector<GesStep> steps;
};

/// Greedy equivalence search: forward Insert phase from the empty graph,
/// then backward Delete phase, each applying the best strictly improving
/// valid operator and re-completing the CPDAG after every step. Ties go to
/// the lowest (from, to, subset) tuple.
GesResult ges(const Matrix &x, const GesConfig &cfg, const TraceSink &sink = {});
GesResult ges(const BicScore &score, const GesConfig &cfg, const TraceSink &sink = {});

} // namespace causalforge
