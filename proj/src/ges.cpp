#include "causalforge/ges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalforge/error.hpp"
#include "causalforge/numeric.hpp"

namespace causalforge {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kMinImprovement = 1e-10;

bool adjacent(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 || g(b, a) != 0; }
bool directed(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 && g(b, a) == 0; }
bool undirected(const PdagMatrix &g, int a, int b) { return g(a, b) != 0 && g(b, a) != 0; }

std::vector<int> parents_of(const PdagMatrix &g, int y) {
  std::vector<int> out;
  for (int z = 0; z < g.rows(); ++z) {
    if (directed(g, z, y)) out.push_back(z);
  }
  return out;
}

bool is_clique(const PdagMatrix &g, const std::vector<int> &nodes) {
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (!adjacent(g, nodes[a], nodes[b])) return false;
    }
  }
  return true;
}

// True when every semi-directed path from `start` to `goal` passes through
// a node of `blockers`.
bool semi_directed_paths_blocked(const PdagMatrix &g, int start, int goal, const std::vector<int> &blockers) {
  const int d = static_cast<int>(g.rows());
  std::vector<bool> seen(d, false);
  for (const int b : blockers) seen[b] = true;
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < d; ++v) {
      if (seen[v] || g(u, v) == 0) continue; // u->v or u--v
      if (v == goal) return false;
      seen[v] = true;
      stack.push_back(v);
    }
  }
  return true;
}

std::vector<int> set_union(std::vector<int> a, const std::vector<int> &b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<int> without(std::vector<int> a, int x) {
  std::erase(a, x);
  return a;
}

std::vector<std::vector<int>> all_subsets(const std::vector<int> &items) {
  std::vector<std::vector<int>> out;
  const std::size_t count = std::size_t{1} << items.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<int> subset;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (mask & (std::size_t{1} << k)) subset.push_back(items[k]);
    }
    out.push_back(std::move(subset));
  }
  return out;
}

struct Candidate {
  double delta = -std::numeric_limits<double>::infinity();
  int from = -1;
  int to = -1;
  std::vector<int> subset;

  bool valid() const { return from >= 0; }

  void offer(double d, int x, int y, const std::vector<int> &s) {
    const bool better =
        d > delta || (d == delta && std::tie(x, y, s) < std::tie(from, to, subset));
    if (better) {
      delta = d;
      from = x;
      to = y;
      subset = s;
    }
  }
};

PdagMatrix complete(const PdagMatrix &g) { return dag_to_cpdag(pdag_to_dag(g)).adjacency(); }

Candidate best_insert(const PdagMatrix &g, const BicScore &score, const GesConfig &cfg) {
  const int d = static_cast<int>(g.rows());
  Candidate best;
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      if (x == y || adjacent(g, x, y)) continue;
      std::vector<int> na;
      std::vector<int> t0;
      for (int z = 0; z < d; ++z) {
        if (z == x || z == y || !undirected(g, z, y)) continue;
        (adjacent(g, z, x) ? na : t0).push_back(z);
      }
      const auto pa = parents_of(g, y);
      for (const auto &t : all_subsets(t0)) {
        const auto s = set_union(na, t);
        if (!is_clique(g, s)) continue;
        if (!semi_directed_paths_blocked(g, y, x, s)) continue;
        const auto base = set_union(pa, s);
        const auto with_x = set_union(base, {x});
        if (cfg.max_parents && static_cast<int>(with_x.size()) > *cfg.max_parents) continue;
        best.offer(score.local(y, with_x) - score.local(y, base), x, y, t);
      }
    }
  }
  return best;
}

Candidate best_delete(const PdagMatrix &g, const BicScore &score) {
  const int d = static_cast<int>(g.rows());
  Candidate best;
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      if (x == y || g(x, y) == 0) continue; // x->y or x--y
      std::vector<int> na;
      for (int z = 0; z < d; ++z) {
        if (z != x && z != y && undirected(g, z, y) && adjacent(g, z, x)) na.push_back(z);
      }
      const auto pa = parents_of(g, y);
      for (const auto &h : all_subsets(na)) {
        std::vector<int> rest;
        std::set_difference(na.begin(), na.end(), h.begin(), h.end(), std::back_inserter(rest));
        if (!is_clique(g, rest)) continue;
        const auto with_x = set_union(set_union(pa, rest), {x});
        const auto base = without(with_x, x);
        best.offer(score.local(y, base) - score.local(y, with_x), x, y, h);
      }
    }
  }
  return best;
}

} // namespace

void GesConfig::validate() const {
  if (!(penalty_discount > 0.0)) throw Error(ErrorCode::kInvalidConfig, "penalty_discount must be positive");
  if (max_parents && *max_parents < 0) throw Error(ErrorCode::kInvalidConfig, "max_parents must be non-negative");
}

double bic_local(const Matrix &cov, long n, int node, std::span<const int> parents, const GesConfig &cfg) {
  double sigma2 = cov(node, node);
  const auto k = static_cast<Eigen::Index>(parents.size());
  if (k > 0) {
    Matrix cpp(k, k);
    Vector cpn(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      cpn[a] = cov(parents[a], node);
      for (Eigen::Index b = 0; b < k; ++b) cpp(a, b) = cov(parents[a], parents[b]);
    }
    Eigen::LLT<Matrix> llt(cpp);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularCovariance, "parent covariance is not positive definite");
    }
    sigma2 -= cpn.dot(llt.solve(cpn));
  }
  sigma2 = std::max(sigma2, kVarianceFloor);
  const double logn = std::log(static_cast<double>(n));
  return -0.5 * static_cast<double>(n) * std::log(sigma2) -
         cfg.penalty_discount * 0.5 * static_cast<double>(k + 1) * logn;
}

BicScore::BicScore(const Matrix &x, const GesConfig &cfg)
    : BicScore(covariance(center_columns(x)), static_cast<long>(x.rows()), cfg) {}

BicScore::BicScore(Matrix cov, long n, const GesConfig &cfg) : cov_(std::move(cov)), n_(n), cfg_(cfg) {
  cfg_.validate();
  if (cov_.rows() != cov_.cols()) throw Error(ErrorCode::kShapeError, "covariance must be square");
}

double BicScore::local(int node, std::vector<int> parents) const {
  std::sort(parents.begin(), parents.end());
  auto key = std::make_pair(node, std::move(parents));
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double value = bic_local(cov_, n_, node, key.second, cfg_);
  cache_.emplace(std::move(key), value);
  return value;
}

double BicScore::total(const BinaryGraph &dag) const {
  double sum = 0.0;
  for (int j = 0; j < dag.size(); ++j) {
    std::vector<int> pa;
    for (int i = 0; i < dag.size(); ++i) {
      if (dag.has_edge(i, j)) pa.push_back(i);
    }
    sum += local(j, std::move(pa));
  }
  return sum;
}

GesResult ges(const Matrix &x, const GesConfig &cfg, const TraceSink &sink) {
  cfg.validate();
  if (x.cols() <= 1) {
    GesResult out;
    out.graph = Cpdag(static_cast<int>(x.cols()));
    return out;
  }
  if (x.rows() <= x.cols() + 3) {
    throw Error(ErrorCode::kInsufficientSamples, "GES needs n > d + 3");
  }
  const BicScore score(x, cfg);
  return ges(score, cfg, sink);
}

GesResult ges(const BicScore &score, const GesConfig &cfg, const TraceSink &sink) {
  cfg.validate();
  const int d = score.num_variables();
  PdagMatrix g = PdagMatrix::Zero(d, d);
  GesResult out;
  double total = score.total(BinaryGraph(d));
  int iteration = 0;

  auto record = [&](GesPhase phase, const Candidate &c) {
    total = score.total(pdag_to_dag(g));
    out.steps.push_back({phase, c.from, c.to, c.subset, c.delta, total});
    TraceEntry entry{iteration++, total, std::nullopt, std::nullopt};
    if (sink) sink(entry);
  };

  while (true) {
    const Candidate c = best_insert(g, score, cfg);
    if (!c.valid() || !(c.delta > kMinImprovement)) break;
    g(c.from, c.to) = 1;
    g(c.to, c.from) = 0;
    for (const int t : c.subset) g(c.to, t) = 0; // t--y becomes t->y
    g = complete(g);
    record(GesPhase::kForward, c);
  }
  while (true) {
    const Candidate c = best_delete(g, score);
    if (!c.valid() || !(c.delta > kMinImprovement)) break;
    g(c.from, c.to) = 0;
    g(c.to, c.from) = 0;
    for (const int h : c.subset) {
      if (undirected(g, c.to, h)) g(h, c.to) = 0;     // y--h becomes y->h
      if (undirected(g, c.from, h)) g(h, c.from) = 0; // x--h becomes x->h
    }
    g = complete(g);
    record(GesPhase::kBackward, c);
  }

  out.graph = Cpdag(std::move(g));
  out.score = total;
  return out;
}

} // namespace causalforge
