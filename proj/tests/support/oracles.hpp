#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "causalforge/graph.hpp"
#include "causalforge/metrics.hpp"
#include "causalforge/pc.hpp"

namespace oracle {

using causalforge::IntMatrix;
using causalforge::Matrix;

/// Reachability-free d-separation: x and y are d-separated by z iff they are
/// disconnected in the moralized ancestral graph of {x, y} u z with z removed.
bool d_separated(const IntMatrix &dag, int x, int y, std::span<const int> z);

class DSeparationCi final : public causalforge::CiTest {
public:
  explicit DSeparationCi(IntMatrix dag) : dag_(std::move(dag)) {}
  int num_variables() const override { return static_cast<int>(dag_.rows()); }
  causalforge::CiTestResult test(int i, int j, std::span<const int> given) const override;

private:
  IntMatrix dag_;
};

/// Plain DFS cycle check.
bool acyclic(const IntMatrix &adj);

/// Every labelled DAG on d <= 4 nodes.
std::vector<IntMatrix> all_dags(int d);

/// The set of d-separation statements of a DAG, as a bitstring over all
/// (x, y, z) triples. Only for d <= 5.
std::vector<bool> independence_signature(const IntMatrix &dag);

/// CPDAG by brute force: enumerate every orientation of the skeleton, keep
/// the acyclic ones with identical d-separation statements (d <= 5) or
/// identical v-structures (larger d), and mark an edge undirected when the
/// members disagree on it.
IntMatrix equivalence_class_cpdag(const IntMatrix &dag);

/// Unshielded colliders as (a, c, b) with a < b.
std::vector<std::array<int, 3>> v_structures(const IntMatrix &dag);

/// Metrics recomputed from explicit edge lists.
causalforge::MetricsReport brute_force_metrics(const IntMatrix &estimate, const IntMatrix &truth);

/// (I - W)^{-T} diag(noise_var) (I - W)^{-1}.
Matrix linear_sem_covariance(const Matrix &w, double noise_var = 1.0);

/// Random DAG drawn independently of the library: random order, each
/// forward pair present with probability p.
IntMatrix random_dag(int d, double p, std::mt19937_64 &rng);

/// Random 0/1 matrix with zero diagonal; symmetric pairs allowed.
IntMatrix random_pdag(int d, double p, std::mt19937_64 &rng);

/// P^T A P style relabeling: out(perm[i], perm[j]) = in(i, j).
template <class M> M relabel(const M &in, const std::vector<int> &perm) {
  M out = M::Zero(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    for (Eigen::Index j = 0; j < in.cols(); ++j) out(perm[i], perm[j]) = in(i, j);
  }
  return out;
}

std::vector<int> random_permutation(int d, std::mt19937_64 &rng);

} // namespace oracle
