#include "causalforge/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>

#include "causalforge/error.hpp"
#include "causalforge/random.hpp"

namespace causalforge {

namespace {

template <typename Derived> void check_square_zero_diagonal(const Eigen::MatrixBase<Derived> &m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidGraph, "adjacency matrix must be square, got " +
                                              std::to_string(m.rows()) + "x" +
                                              std::to_string(m.cols()));
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0) {
      throw Error(ErrorCode::kInvalidGraph,
                  "nonzero diagonal entry at node " + std::to_string(i));
    }
  }
}

template <typename Derived> IntMatrix support_of(const Eigen::MatrixBase<Derived> &m) {
  return (m.array() != 0).template cast<int>();
}

// Kahn's algorithm on a 0/1 support. Returns an order covering fewer than d
// nodes when a cycle exists.
std::vector<int> kahn_order(const IntMatrix &adj) {
  const int d = static_cast<int>(adj.rows());
  std::vector<int> indegree(d, 0);
  for (int j = 0; j < d; ++j) indegree[j] = adj.col(j).sum();

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int j = 0; j < d; ++j) {
    if (indegree[j] == 0) ready.push(j);
  }
  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v = 0; v < d; ++v) {
      if (adj(u, v) != 0 && --indegree[v] == 0) ready.push(v);
    }
  }
  return order;
}

} // namespace

// BinaryGraph ----------------------------------------------------------------

BinaryGraph::BinaryGraph(int d) : adjacency_(IntMatrix::Zero(d, d)) {}

BinaryGraph::BinaryGraph(IntMatrix adjacency) : adjacency_(std::move(adjacency)) {
  check_square_zero_diagonal(adjacency_);
  if (((adjacency_.array() != 0) && (adjacency_.array() != 1)).any()) {
    throw Error(ErrorCode::kInvalidGraph, "binary adjacency entries must be 0 or 1");
  }
}

void BinaryGraph::add_edge(int from, int to) {
  if (from == to) throw Error(ErrorCode::kInvalidGraph, "self loop");
  adjacency_(from, to) = 1;
}

std::vector<Edge> BinaryGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (adjacency_(i, j) != 0) out.push_back({i, j});
    }
  }
  return out;
}

// WeightedGraph --------------------------------------------------------------

WeightedGraph::WeightedGraph(int d) : weights_(Matrix::Zero(d, d)) {}

WeightedGraph::WeightedGraph(Matrix weights) : weights_(std::move(weights)) {
  check_square_zero_diagonal(weights_);
  if (!weights_.allFinite()) throw Error(ErrorCode::kInvalidGraph, "non-finite weight");
}

void WeightedGraph::set_weight(int from, int to, double w) {
  if (from == to && w != 0.0) throw Error(ErrorCode::kInvalidGraph, "self loop");
  weights_(from, to) = w;
}

BinaryGraph WeightedGraph::support() const { return BinaryGraph(support_of(weights_)); }

// Cpdag ----------------------------------------------------------------------

Cpdag::Cpdag(int d) : adjacency_(PdagMatrix::Zero(d, d)) {}

Cpdag::Cpdag(PdagMatrix adjacency) : adjacency_(std::move(adjacency)) {
  check_square_zero_diagonal(adjacency_);
  if (((adjacency_.array() != 0) && (adjacency_.array() != 1)).any()) {
    throw Error(ErrorCode::kInvalidGraph, "CPDAG adjacency entries must be 0 or 1");
  }
  const IntMatrix directed =
      ((adjacency_.array() != 0) && (adjacency_.transpose().array() == 0)).cast<int>();
  if (find_directed_cycle(directed)) {
    throw Error(ErrorCode::kInvalidGraph, "directed part of CPDAG contains a cycle");
  }
}

int Cpdag::num_edges() const {
  int count = 0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (adjacent(i, j)) ++count;
    }
  }
  return count;
}

// Acyclicity -----------------------------------------------------------------

bool is_dag(const Matrix &m) {
  check_square_zero_diagonal(m);
  return static_cast<Eigen::Index>(kahn_order(support_of(m)).size()) == m.rows();
}

bool is_dag(const IntMatrix &m) {
  check_square_zero_diagonal(m);
  return static_cast<Eigen::Index>(kahn_order(support_of(m)).size()) == m.rows();
}

std::vector<int> topological_order(const BinaryGraph &g) {
  auto order = kahn_order(g.adjacency());
  if (static_cast<int>(order.size()) != g.size()) {
    throw Error(ErrorCode::kNotADag, "graph contains a directed cycle");
  }
  return order;
}

std::optional<std::vector<int>> find_directed_cycle(const IntMatrix &adj) {
  const int d = static_cast<int>(adj.rows());
  enum class Mark { kNew, kActive, kDone };
  std::vector<Mark> mark(d, Mark::kNew);
  std::vector<int> parent(d, -1);

  for (int root = 0; root < d; ++root) {
    if (mark[root] != Mark::kNew) continue;
    // Explicit stack of (node, next neighbor to inspect).
    std::vector<std::pair<int, int>> stack{{root, 0}};
    mark[root] = Mark::kActive;
    while (!stack.empty()) {
      auto &[u, next] = stack.back();
      if (next == d) {
        mark[u] = Mark::kDone;
        stack.pop_back();
        continue;
      }
      const int v = next++;
      if (v == u || adj(u, v) == 0) continue;
      if (mark[v] == Mark::kActive) {
        std::vector<int> cycle{v};
        for (int w = u; w != v; w = parent[w]) cycle.push_back(w);
        std::reverse(cycle.begin() + 1, cycle.end());
        return cycle;
      }
      if (mark[v] == Mark::kNew) {
        mark[v] = Mark::kActive;
        parent[v] = u;
        stack.emplace_back(v, 0);
      }
    }
  }
  return std::nullopt;
}

// Random generators ----------------------------------------------------------

std::string_view graph_model_name(GraphModel model) {
  switch (model) {
  case GraphModel::kErdosRenyi:
    return "erdos_renyi";
  case GraphModel::kScaleFree:
    return "scale_free";
  case GraphModel::kLowRank:
    return "low_rank";
  }
  return "erdos_renyi";
}

GraphModel parse_graph_model(std::string_view name) {
  if (name == "erdos_renyi" || name == "er") return GraphModel::kErdosRenyi;
  if (name == "scale_free" || name == "sf") return GraphModel::kScaleFree;
  if (name == "low_rank" || name == "lr") return GraphModel::kLowRank;
  throw Error(ErrorCode::kInvalidConfig, "unknown graph model '" + std::string(name) + "'");
}

void RandomGraphConfig::validate() const {
  if (d < 1) throw Error(ErrorCode::kInvalidConfig, "d must be at least 1");
  const long long max_edges = static_cast<long long>(d) * (d - 1) / 2;
  if (e < 0 || e > max_edges) {
    throw Error(ErrorCode::kInvalidConfig,
                "e must lie in [0, d(d-1)/2 = " + std::to_string(max_edges) + "]");
  }
  if (!(weight_lo > 0.0) || !(weight_lo < weight_hi) || !std::isfinite(weight_hi)) {
    throw Error(ErrorCode::kInvalidConfig, "weight_range must satisfy 0 < lo < hi");
  }
  if (model == GraphModel::kLowRank && (rank < 1 || rank > d)) {
    throw Error(ErrorCode::kInvalidConfig, "rank must lie in [1, d]");
  }
}

namespace {

struct Slot {
  int a; // position in the random order; a < b
  int b;
};

std::vector<Slot> upper_slots(int d) {
  std::vector<Slot> slots;
  slots.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) slots.push_back({a, b});
  }
  return slots;
}

std::vector<int> random_permutation(int d, Rng &rng) {
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  return perm;
}

WeightedGraph erdos_renyi(const RandomGraphConfig &cfg, Rng &rng) {
  const auto perm = random_permutation(cfg.d, rng);
  auto slots = upper_slots(cfg.d);
  shuffle(slots, rng);
  slots.resize(std::min<std::size_t>(slots.size(), static_cast<std::size_t>(cfg.e)));

  Matrix w = Matrix::Zero(cfg.d, cfg.d);
  for (const auto &s : slots) {
    w(perm[s.a], perm[s.b]) = signed_uniform(rng, cfg.weight_lo, cfg.weight_hi);
  }
  return WeightedGraph(std::move(w));
}

// Barabasi-Albert growth. Arrival index a attaches to up to m earlier
// arrivals with probability proportional to (degree + 1), oriented old->new.
WeightedGraph scale_free(const RandomGraphConfig &cfg, Rng &rng) {
  const int d = cfg.d;
  const int m = cfg.e == 0 ? 0 : (cfg.e + d - 1) / d;
  const auto perm = random_permutation(d, rng);

  std::vector<int> degree(d, 0);
  Matrix w = Matrix::Zero(d, d);
  for (int a = 1; a < d; ++a) {
    const int stubs = std::min(m, a);
    std::vector<bool> chosen(a, false);
    for (int s = 0; s < stubs; ++s) {
      double total = 0.0;
      for (int b = 0; b < a; ++b) {
        if (!chosen[b]) total += degree[b] + 1.0;
      }
      double target = uniform01(rng) * total;
      int pick = -1;
      for (int b = 0; b < a; ++b) {
        if (chosen[b]) continue;
        pick = b;
        target -= degree[b] + 1.0;
        if (target < 0.0) break;
      }
      chosen[pick] = true;
      ++degree[pick];
      ++degree[a];
    }
    for (int b = 0; b < a; ++b) {
      if (chosen[b]) w(perm[b], perm[a]) = signed_uniform(rng, cfg.weight_lo, cfg.weight_hi);
    }
  }
  return WeightedGraph(std::move(w));
}

Matrix low_rank_product(const RandomGraphConfig &cfg, Rng &rng) {
  Matrix u(cfg.d, cfg.rank);
  Matrix v(cfg.d, cfg.rank);
  for (int i = 0; i < cfg.d; ++i) {
    for (int k = 0; k < cfg.rank; ++k) u(i, k) = standard_normal(rng);
  }
  for (int i = 0; i < cfg.d; ++i) {
    for (int k = 0; k < cfg.rank; ++k) v(i, k) = standard_normal(rng);
  }
  return u * v.transpose();
}

WeightedGraph low_rank(const RandomGraphConfig &cfg, Rng &rng) {
  const Matrix full = low_rank_product(cfg, rng);
  const auto perm = random_permutation(cfg.d, rng);
  auto slots = upper_slots(cfg.d);
  std::stable_sort(slots.begin(), slots.end(), [&](const Slot &x, const Slot &y) {
    return std::abs(full(perm[x.a], perm[x.b])) > std::abs(full(perm[y.a], perm[y.b]));
  });
  slots.resize(static_cast<std::size_t>(cfg.e));

  Matrix w = Matrix::Zero(cfg.d, cfg.d);
  if (slots.empty()) return WeightedGraph(std::move(w));

  double lo = std::abs(full(perm[slots.back().a], perm[slots.back().b]));
  double hi = std::abs(full(perm[slots.front().a], perm[slots.front().b]));
  for (const auto &s : slots) {
    const double value = full(perm[s.a], perm[s.b]);
    const double magnitude =
        hi > lo ? cfg.weight_lo + (std::abs(value) - lo) / (hi - lo) * (cfg.weight_hi - cfg.weight_lo)
                : 0.5 * (cfg.weight_lo + cfg.weight_hi);
    w(perm[s.a], perm[s.b]) = value < 0.0 ? -magnitude : magnitude;
  }
  return WeightedGraph(std::move(w));
}

} // namespace

WeightedGraph random_dag(const RandomGraphConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  switch (cfg.model) {
  case GraphModel::kErdosRenyi:
    return erdos_renyi(cfg, rng);
  case GraphModel::kScaleFree:
    return scale_free(cfg, rng);
  case GraphModel::kLowRank:
    return low_rank(cfg, rng);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown graph model");
}

Matrix low_rank_dense(const RandomGraphConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return low_rank_product(cfg, rng);
}

double standard_normal(Rng &rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Equivalence classes --------------------------------------------------------

namespace {

bool adjacent(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 || g(b, a) != 0; }
bool directed(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 && g(b, a) == 0; }
bool undirected(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 && g(b, a) != 0; }

// Whether the undirected edge a--b must be oriented a->b by one of R1-R4.
bool meek_orients(const PdagMatrix &g, int a, int b) {
  const int d = static_cast<int>(g.rows());
  for (int c = 0; c < d; ++c) {
    if (c == a || c == b) continue;
    // R1: c->a--b, c and b nonadjacent.
    if (directed(g, c, a) && !adjacent(g, c, b)) return true;
    // R2: a->c->b.
    if (directed(g, a, c) && directed(g, c, b)) return true;
  }
  for (int c = 0; c < d; ++c) {
    if (c == a || c == b || !undirected(g, a, c)) continue;
    for (int e = 0; e < d; ++e) {
      if (e == a || e == b || e == c) continue;
      // R3: a--c->b, a--e->b, c and e nonadjacent.
      if (e > c && undirected(g, a, e) && directed(g, c, b) && directed(g, e, b) &&
          !adjacent(g, c, e)) {
        return true;
      }
      // R4: a--c, c->e->b, c and b nonadjacent, a adjacent to e.
      if (directed(g, c, e) && directed(g, e, b) && !adjacent(g, c, b) && adjacent(g, a, e)) {
        return true;
      }
    }
  }
  return false;
}

} // namespace

void apply_meek_closure(PdagMatrix &pdag) {
  const int d = static_cast<int>(pdag.rows());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        if (a == b || !undirected(pdag, a, b)) continue;
        if (meek_orients(pdag, a, b)) {
          pdag(b, a) = 0;
          changed = true;
        }
      }
    }
  }
}

Cpdag dag_to_cpdag(const BinaryGraph &g) {
  if (!is_dag(g)) throw Error(ErrorCode::kNotADag, "dag_to_cpdag requires an acyclic graph");
  const int d = g.size();
  const IntMatrix &adj = g.adjacency();
  PdagMatrix pdag = skeleton_of(adj);
  // Keep exactly the edges that participate in a v-structure directed.
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      if (adj(i, k) == 0) continue;
      for (int j = i + 1; j < d; ++j) {
        if (adj(j, k) == 0 || adj(i, j) != 0 || adj(j, i) != 0) continue;
        pdag(k, i) = 0;
        pdag(k, j) = 0;
      }
    }
  }
  apply_meek_closure(pdag);
  return Cpdag(std::move(pdag));
}

BinaryGraph pdag_to_dag(const PdagMatrix &pdag) {
  const int d = static_cast<int>(pdag.rows());
  PdagMatrix work = pdag;
  IntMatrix dag = IntMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (directed(pdag, i, j)) dag(i, j) = 1;
    }
  }
  std::vector<bool> removed(d, false);
  for (int step = 0; step < d; ++step) {
    int sink = -1;
    for (int x = 0; x < d && sink < 0; ++x) {
      if (removed[x]) continue;
      bool ok = true;
      for (int y = 0; y < d && ok; ++y) {
        if (!removed[y] && y != x && directed(work, x, y)) ok = false;
      }
      for (int y = 0; y < d && ok; ++y) {
        if (removed[y] || y == x || !undirected(work, x, y)) continue;
        for (int z = 0; z < d && ok; ++z) {
          if (removed[z] || z == x || z == y) continue;
          if (adjacent(work, x, z) && !adjacent(work, y, z)) ok = false;
        }
      }
      if (ok) sink = x;
    }
    if (sink < 0) throw Error(ErrorCode::kInvalidGraph, "PDAG admits no consistent DAG extension");
    for (int y = 0; y < d; ++y) {
      if (!removed[y] && y != sink && undirected(work, sink, y)) dag(y, sink) = 1;
    }
    removed[sink] = true;
  }
  return BinaryGraph(std::move(dag));
}

IntMatrix skeleton_of(const IntMatrix &adj) {
  return ((adj.array() != 0) || (adj.transpose().array() != 0)).cast<int>();
}

} // namespace causalforge
