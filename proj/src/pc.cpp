#include "causalforge/pc.hpp"

#include <algorithm>
#include <cmath>

#include "causalforge/error.hpp"
#include "causalforge/prior.hpp"

namespace causalforge {

FisherZCiTest::FisherZCiTest(const Matrix &x, double alpha)
    : cov_(covariance(center_columns(x))), n_(static_cast<long>(x.rows())), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1)");
}

CiTestResult FisherZCiTest::test(int i, int j, std::span<const int> given) const {
  constexpr double kMaxAbsCorrelation = 1.0 - 1e-12;
  const double r = std::clamp(partial_correlation(cov_, i, j, given), -kMaxAbsCorrelation,
                              kMaxAbsCorrelation);
  return fisher_z_test(r, n_, static_cast<int>(given.size()), alpha_);
}

void PcConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1)");
  if (max_condition_size && *max_condition_size < 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_condition_size must be non-negative");
  }
}

void SepsetTable::set(int i, int j, std::vector<int> given) {
  std::sort(given.begin(), given.end());
  sets_[key(i, j)] = std::move(given);
}

namespace {

// Visits size-k subsets of `items` in lexicographic order until `visit`
// returns true. Returns whether any call did.
template <typename Visit>
bool for_each_subset(const std::vector<int> &items, int k, Visit &&visit) {
  const int n = static_cast<int>(items.size());
  if (k > n) return false;
  std::vector<int> idx(k);
  for (int a = 0; a < k; ++a) idx[a] = a;
  std::vector<int> subset(k);
  while (true) {
    for (int a = 0; a < k; ++a) subset[a] = items[idx[a]];
    if (visit(subset)) return true;
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return false;
    ++idx[pos];
    for (int a = pos + 1; a < k; ++a) idx[a] = idx[a - 1] + 1;
  }
}

IntMatrix directed_part(const PdagMatrix &pdag) {
  return ((pdag.array() != 0) && (pdag.transpose().array() == 0)).cast<int>();
}

// Un-orient every unlocked edge on directed cycles until none remain.
void break_directed_cycles(PdagMatrix &pdag, const PriorKnowledge *prior) {
  auto locked = [&](int from, int to) {
    return prior && (prior->is_required(from, to) || prior->is_forbidden(to, from));
  };
  while (auto cycle = find_directed_cycle(directed_part(pdag))) {
    const auto &c = *cycle;
    bool changed = false;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const int from = c[k];
      const int to = c[(k + 1) % c.size()];
      if (locked(from, to)) continue;
      pdag(to, from) = 1;
      changed = true;
    }
    for (std::size_t k = 0; k < c.size() && !changed; ++k) {
      const int from = c[k];
      const int to = c[(k + 1) % c.size()];
      if (prior && prior->is_required(from, to)) continue;
      pdag(from, to) = 0;
      changed = true;
    }
    if (!changed) throw Error(ErrorCode::kPriorConflict, "required edges form a directed cycle");
  }
}

} // namespace

SkeletonResult pc_skeleton(const CiTest &ci, const PcConfig &cfg,
                           const SkeletonConstraints &constraints) {
  cfg.validate();
  const int d = ci.num_variables();
  IntMatrix adj = IntMatrix::Ones(d, d);
  adj.diagonal().setZero();
  if (constraints.candidates.size() != 0) {
    if (constraints.candidates.rows() != d || constraints.candidates.cols() != d) {
      throw Error(ErrorCode::kShapeError, "candidate mask has the wrong shape");
    }
    adj = adj.cwiseProduct(skeleton_of(constraints.candidates));
  }
  IntMatrix guard = IntMatrix::Zero(d, d);
  if (constraints.protected_pairs.size() != 0) guard = skeleton_of(constraints.protected_pairs);
  adj = ((adj.array() != 0) || (guard.array() != 0)).cast<int>();
  adj.diagonal().setZero();

  SkeletonResult out;
  const int max_level = cfg.max_condition_size.value_or(std::max(0, d - 2));
  for (int level = 0; level <= max_level; ++level) {
    const IntMatrix snapshot = adj;
    bool any_testable = false;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i == j || adj(i, j) == 0 || guard(i, j) != 0) continue;
        const IntMatrix &source = cfg.variant == PcVariant::kStable ? snapshot : adj;
        std::vector<int> candidates;
        for (int k = 0; k < d; ++k) {
          if (k != j && k != i && source(i, k) != 0) candidates.push_back(k);
        }
        if (static_cast<int>(candidates.size()) < level) continue;
        any_testable = true;
        for_each_subset(candidates, level, [&](const std::vector<int> &given) {
          if (!ci.test(i, j, given).independent) return false;
          adj(i, j) = 0;
          adj(j, i) = 0;
          out.sepsets.set(i, j, given);
          return true;
        });
      }
    }
    if (!any_testable) break;
  }
  out.skeleton = std::move(adj);
  return out;
}

PdagMatrix orient_v_structures(const IntMatrix &skeleton, const SepsetTable &sepsets) {
  const int d = static_cast<int>(skeleton.rows());
  IntMatrix claims = IntMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      if (i == k || skeleton(i, k) == 0) continue;
      for (int j = i + 1; j < d; ++j) {
        if (j == k || skeleton(j, k) == 0 || skeleton(i, j) != 0) continue;
        if (!sepsets.contains(i, j)) continue;
        const auto &given = sepsets.get(i, j);
        if (std::binary_search(given.begin(), given.end(), k)) continue;
        claims(i, k) = 1;
        claims(j, k) = 1;
      }
    }
  }
  PdagMatrix pdag = skeleton;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      // A single claim orients the edge; opposing claims leave it undirected.
      if (claims(a, b) != 0 && claims(b, a) == 0) pdag(b, a) = 0;
    }
  }
  return pdag;
}

Cpdag apply_meek_rules(PdagMatrix pdag, const PriorKnowledge *prior) {
  break_directed_cycles(pdag, prior);
  apply_meek_closure(pdag);
  if (prior) impose_prior_on_pdag(pdag, *prior);
  if (find_directed_cycle(directed_part(pdag))) break_directed_cycles(pdag, prior);
  return Cpdag(std::move(pdag));
}

Cpdag pc(const CiTest &ci, const PcConfig &cfg, const PriorKnowledge *prior,
         const IntMatrix *candidate_mask) {
  cfg.validate();
  const int d = ci.num_variables();
  if (d <= 1) return Cpdag(std::max(d, 0));

  SkeletonConstraints constraints;
  constraints.candidates = IntMatrix::Ones(d, d);
  constraints.candidates.diagonal().setZero();
  if (candidate_mask) constraints.candidates = constraints.candidates.cwiseProduct(skeleton_of(*candidate_mask));
  if (prior) {
    prior->validate(d);
    for (const auto &e : prior->forbidden) {
      if (prior->is_forbidden(e.to, e.from)) {
        constraints.candidates(e.from, e.to) = 0;
        constraints.candidates(e.to, e.from) = 0;
      }
    }
    constraints.protected_pairs = prior->required_matrix(d);
  }

  const SkeletonResult skel = pc_skeleton(ci, cfg, constraints);
  PdagMatrix pdag = orient_v_structures(skel.skeleton, skel.sepsets);
  if (prior) impose_prior_on_pdag(pdag, *prior);
  return apply_meek_rules(std::move(pdag), prior);
}

Cpdag pc(const Matrix &x, const PcConfig &cfg, const PriorKnowledge *prior,
         const IntMatrix *candidate_mask) {
  if (x.cols() <= 1) return Cpdag(static_cast<int>(x.cols()));
  const FisherZCiTest ci(x, cfg.alpha);
  return pc(ci, cfg, prior, candidate_mask);
}

} // namespace causalforge
