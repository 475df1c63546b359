#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace causalforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;

/// Partially directed graph in adjacency form: (i,j)=1 alone is i->j, and
/// (i,j)=(j,i)=1 is the undirected edge i--j.
using PdagMatrix = Eigen::MatrixXi;

struct Edge {
  int from = 0;
  int to = 0;

  friend auto operator<=>(const Edge &, const Edge &) = default;
};

/// 0/1 adjacency matrix; entry (i,j)=1 means i->j.
class BinaryGraph {
public:
  BinaryGraph() = default;
  explicit BinaryGraph(int d);
  explicit BinaryGraph(IntMatrix adjacency);

  int size() const noexcept { return static_cast<int>(adjacency_.rows()); }
  bool has_edge(int from, int to) const { return adjacency_(from, to) != 0; }
  void add_edge(int from, int to);
  void remove_edge(int from, int to) { adjacency_(from, to) = 0; }

  const IntMatrix &adjacency() const noexcept { return adjacency_; }
  int num_edges() const { return adjacency_.sum(); }
  std::vector<Edge> edges() const;

  friend bool operator==(const BinaryGraph &a, const BinaryGraph &b) {
    return a.adjacency_ == b.adjacency_;
  }

private:
  IntMatrix adjacency_;
};

/// Real-valued weight matrix; nonzero (i,j) means the weighted edge i->j.
class WeightedGraph {
public:
  WeightedGraph() = default;
  explicit WeightedGraph(int d);
  explicit WeightedGraph(Matrix weights);

  int size() const noexcept { return static_cast<int>(weights_.rows()); }
  double weight(int from, int to) const { return weights_(from, to); }
  void set_weight(int from, int to, double w);

  const Matrix &weights() const noexcept { return weights_; }
  BinaryGraph support() const;
  int num_edges() const { return static_cast<int>((weights_.array() != 0.0).count()); }

  friend bool operator==(const WeightedGraph &a, const WeightedGraph &b) {
    return a.weights_ == b.weights_;
  }

private:
  Matrix weights_;
};

/// Completed PDAG. Symmetric 1-pairs are undirected edges; the directed
/// (asymmetric) part is acyclic.
class Cpdag {
public:
  Cpdag() = default;
  explicit Cpdag(int d);
  explicit Cpdag(PdagMatrix adjacency);

  int size() const noexcept { return static_cast<int>(adjacency_.rows()); }
  const PdagMatrix &adjacency() const noexcept { return adjacency_; }

  bool adjacent(int i, int j) const { return adjacency_(i, j) != 0 || adjacency_(j, i) != 0; }
  bool is_directed(int from, int to) const {
    return adjacency_(from, to) != 0 && adjacency_(to, from) == 0;
  }
  bool is_undirected(int i, int j) const {
    return adjacency_(i, j) != 0 && adjacency_(j, i) != 0;
  }
  /// Edge count with each undirected pair counted once.
  int num_edges() const;

  friend bool operator==(const Cpdag &a, const Cpdag &b) { return a.adjacency_ == b.adjacency_; }

private:
  PdagMatrix adjacency_;
};

// Acyclicity and ordering --------------------------------------------------

/// True iff the support of `m` has no directed cycle. Throws InvalidGraph for
/// non-square input or a nonzero diagonal.
bool is_dag(const Matrix &m);
bool is_dag(const IntMatrix &m);
inline bool is_dag(const BinaryGraph &g) { return is_dag(g.adjacency()); }
inline bool is_dag(const WeightedGraph &g) { return is_dag(g.weights()); }

/// Kahn's algorithm, always releasing the lowest-index ready node first.
std::vector<int> topological_order(const BinaryGraph &g);

/// Some directed cycle in the support of `adj` (as a node sequence, first
/// node not repeated), or nullopt if acyclic. Only asymmetric-or-not entries
/// are followed as given; callers decide how undirected pairs are encoded.
std::optional<std::vector<int>> find_directed_cycle(const IntMatrix &adj);

// Random generators ---------------------------------------------------------

enum class GraphModel { kErdosRenyi, kScaleFree, kLowRank };

std::string_view graph_model_name(GraphModel model);
GraphModel parse_graph_model(std::string_view name);

struct RandomGraphConfig {
  GraphModel model = GraphModel::kErdosRenyi;
  int d = 0;
  int e = 0;
  int rank = 1;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

WeightedGraph random_dag(const RandomGraphConfig &cfg);

/// The dense rank-limited product U*V^T that the low-rank generator
/// sparsifies; exposed so callers can inspect it. Same seed stream as
/// random_dag.
Matrix low_rank_dense(const RandomGraphConfig &cfg);

// Equivalence classes -------------------------------------------------------

/// Apply Meek rules R1-R4 in place until fixpoint.
void apply_meek_closure(PdagMatrix &pdag);

/// Completed PDAG of the Markov equivalence class of `g`.
Cpdag dag_to_cpdag(const BinaryGraph &g);

/// A DAG consistent with the PDAG (Dor-Tarsi). Throws InvalidGraph when the
/// PDAG admits no consistent extension.
BinaryGraph pdag_to_dag(const PdagMatrix &pdag);

/// Unordered adjacency (skeleton) of a PDAG or DAG as a symmetric 0/1 matrix.
IntMatrix skeleton_of(const IntMatrix &adj);

} // namespace causalforge
