#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "causalforge/graph.hpp"
#include "causalforge/numeric.hpp"

namespace causalforge {

struct PriorKnowledge;

/// Source of conditional independence answers for the skeleton search.
class CiTest {
public:
  virtual ~CiTest() = default;
  virtual int num_variables() const = 0;
  virtual CiTestResult test(int i, int j, std::span<const int> given) const = 0;
};

/// Fisher-z test on the partial correlations of a data matrix. The data is
/// centered and its 1/n covariance computed once.
class FisherZCiTest final : public CiTest {
public:
  FisherZCiTest(const Matrix &x, double alpha);

  int num_variables() const override { return static_cast<int>(cov_.rows()); }
  CiTestResult test(int i, int j, std::span<const int> given) const override;

private:
  Matrix cov_;
  long n_;
  double alpha_;
};

enum class PcVariant { kOriginal, kStable };

struct PcConfig {
  double alpha = 0.05;
  PcVariant variant = PcVariant::kStable;
  std::optional<int> max_condition_size; ///< unbounded when empty

  void validate() const;
};

/// Separating sets keyed by unordered pair (stored as (min, max)).
class SepsetTable {
public:
  void set(int i, int j, std::vector<int> given);
  bool contains(int i, int j) const { return sets_.contains(key(i, j)); }
  const std::vector<int> &get(int i, int j) const { return sets_.at(key(i, j)); }
  std::size_t size() const noexcept { return sets_.size(); }
  const std::map<std::pair<int, int>, std::vector<int>> &entries() const noexcept { return sets_; }

private:
  static std::pair<int, int> key(int i, int j) { return i < j ? std::pair{i, j} : std::pair{j, i}; }
  std::map<std::pair<int, int>, std::vector<int>> sets_;
};

struct SkeletonResult {
  IntMatrix skeleton; ///< symmetric 0/1
  SepsetTable sepsets;
};

/// Restrictions on the search space. `candidates` is a symmetric 0/1 matrix
/// of pairs allowed at level 0 (all pairs when empty); `protected_pairs` is
/// a symmetric 0/1 matrix of pairs that are never deleted.
struct SkeletonConstraints {
  IntMatrix candidates;
  IntMatrix protected_pairs;
};

SkeletonResult pc_skeleton(const CiTest &ci, const PcConfig &cfg,
                           const SkeletonConstraints &constraints = {});

/// Orient every unshielded triple i--k--j whose separating set omits k as
/// i->k<-j. When two triples disagree on one edge it is left undirected.
/// Pairs without a recorded sepset (removed by constraints rather than by a
/// test) never form colliders.
PdagMatrix orient_v_structures(const IntMatrix &skeleton, const SepsetTable &sepsets);

/// Meek closure of a PDAG. Any directed cycle left by conflicting
/// orientations is broken by un-orienting its edges before closing. With a
/// prior, required edges and edges whose reverse is forbidden keep their
/// orientation; a cycle made only of such edges loses its first
/// non-required edge.
Cpdag apply_meek_rules(PdagMatrix pdag, const PriorKnowledge *prior = nullptr);

/// Full PC: skeleton, v-structures, Meek closure. Forbidden pairs in both
/// directions are removed before level 0; a pair forbidden in one direction
/// only is oriented the other way. Required edges are never deleted and are
/// oriented as given before the final closure.
Cpdag pc(const CiTest &ci, const PcConfig &cfg, const PriorKnowledge *prior = nullptr,
         const IntMatrix *candidate_mask = nullptr);

Cpdag pc(const Matrix &x, const PcConfig &cfg, const PriorKnowledge *prior = nullptr,
         const IntMatrix *candidate_mask = nullptr);

} // namespace causalforge
