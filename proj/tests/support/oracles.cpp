#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <utility>

namespace oracle {

bool d_separated(const IntMatrix &dag, int x, int y, std::span<const int> z) {
  const int d = static_cast<int>(dag.rows());
  std::vector<bool> in_z(d, false);
  for (int v : z) in_z[v] = true;

  std::vector<bool> anc(d, false);
  std::vector<int> stack{x, y};
  stack.insert(stack.end(), z.begin(), z.end());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (anc[v]) continue;
    anc[v] = true;
    for (int p = 0; p < d; ++p) {
      if (dag(p, v)) stack.push_back(p);
    }
  }

  std::vector<std::vector<bool>> moral(d, std::vector<bool>(d, false));
  for (int v = 0; v < d; ++v) {
    if (!anc[v]) continue;
    std::vector<int> parents;
    for (int p = 0; p < d; ++p) {
      if (dag(p, v) && anc[p]) parents.push_back(p);
    }
    for (int p : parents) moral[p][v] = moral[v][p] = true;
    for (std::size_t a = 0; a < parents.size(); ++a) {
      for (std::size_t b = a + 1; b < parents.size(); ++b) moral[parents[a]][parents[b]] = moral[parents[b]][parents[a]] = true;
    }
  }

  std::vector<bool> seen(d, false);
  stack = {x};
  seen[x] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v == y) return false;
    for (int u = 0; u < d; ++u) {
      if (moral[v][u] && anc[u] && !in_z[u] && !seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  return true;
}

causalforge::CiTestResult DSeparationCi::test(int i, int j, std::span<const int> given) const {
  const bool sep = d_separated(dag_, i, j, given);
  return {sep ? 0.0 : 1e6, sep ? 1.0 : 0.0, sep};
}

bool acyclic(const IntMatrix &adj) {
  const int d = static_cast<int>(adj.rows());
  std::vector<int> colour(d, 0);
  std::function<bool(int)> visit = [&](int v) {
    colour[v] = 1;
    for (int u = 0; u < d; ++u) {
      if (!adj(v, u)) continue;
      if (colour[u] == 1) return false;
      if (colour[u] == 0 && !visit(u)) return false;
    }
    colour[v] = 2;
    return true;
  };
  for (int v = 0; v < d; ++v) {
    if (colour[v] == 0 && !visit(v)) return false;
  }
  return true;
}

std::vector<IntMatrix> all_dags(int d) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
  std::vector<IntMatrix> out;
  for (std::size_t code = 0; code < total; ++code) {
    IntMatrix g = IntMatrix::Zero(d, d);
    std::size_t c = code;
    for (const auto &[i, j] : pairs) {
      const int state = static_cast<int>(c % 3);
      c /= 3;
      if (state == 1) g(i, j) = 1;
      if (state == 2) g(j, i) = 1;
    }
    if (acyclic(g)) out.push_back(g);
  }
  return out;
}

std::vector<bool> independence_signature(const IntMatrix &dag) {
  const int d = static_cast<int>(dag.rows());
  std::vector<bool> sig;
  for (int x = 0; x < d; ++x) {
    for (int y = x + 1; y < d; ++y) {
      std::vector<int> rest;
      for (int v = 0; v < d; ++v) {
        if (v != x && v != y) rest.push_back(v);
      }
      for (unsigned mask = 0; mask < (1u << rest.size()); ++mask) {
        std::vector<int> z;
        for (std::size_t k = 0; k < rest.size(); ++k) {
          if (mask & (1u << k)) z.push_back(rest[k]);
        }
        sig.push_back(d_separated(dag, x, y, z));
      }
    }
  }
  return sig;
}

std::vector<std::array<int, 3>> v_structures(const IntMatrix &dag) {
  const int d = static_cast<int>(dag.rows());
  std::vector<std::array<int, 3>> out;
  for (int c = 0; c < d; ++c) {
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        if (dag(a, c) && dag(b, c) && !dag(a, b) && !dag(b, a)) out.push_back({a, c, b});
      }
    }
  }
  return out;
}

IntMatrix equivalence_class_cpdag(const IntMatrix &dag) {
  const int d = static_cast<int>(dag.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (dag(i, j) || dag(j, i)) edges.emplace_back(i, j);
    }
  }
  const bool by_signature = d <= 5;
  const auto target_sig = by_signature ? independence_signature(dag) : std::vector<bool>{};
  const auto target_v = v_structures(dag);

  IntMatrix cpdag = IntMatrix::Zero(d, d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << edges.size()); ++mask) {
    IntMatrix g = IntMatrix::Zero(d, d);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto [i, j] = edges[k];
      if (mask & (std::size_t{1} << k)) {
        g(j, i) = 1;
      } else {
        g(i, j) = 1;
      }
    }
    if (!acyclic(g)) continue;
    const bool same = by_signature ? independence_signature(g) == target_sig : v_structures(g) == target_v;
    if (same) cpdag = cpdag.cwiseMax(g);
  }
  return cpdag;
}

causalforge::MetricsReport brute_force_metrics(const IntMatrix &estimate, const IntMatrix &truth) {
  const int d = static_cast<int>(truth.rows());
  std::set<std::pair<int, int>> true_edges;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (truth(i, j)) true_edges.insert({i, j});
    }
  }
  std::vector<std::pair<int, int>> directed;
  std::vector<std::pair<int, int>> undirected;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (!estimate(i, j)) continue;
      if (estimate(j, i)) {
        if (i < j) undirected.emplace_back(i, j);
      } else {
        directed.emplace_back(i, j);
      }
    }
  }
  auto truly_joined = [&](int a, int b) { return true_edges.contains({a, b}) || true_edges.contains({b, a}); };

  int tp = 0, rev = 0, fp = 0;
  for (const auto &[a, b] : undirected) (truly_joined(a, b) ? tp : fp) += 1;
  for (const auto &[a, b] : directed) {
    if (true_edges.contains({a, b})) {
      ++tp;
    } else if (true_edges.contains({b, a})) {
      ++rev;
    } else {
      ++fp;
    }
  }
  int fn = 0;
  for (const auto &[a, b] : true_edges) {
    if (!estimate(a, b) && !estimate(b, a)) ++fn;
  }
  const int nnz = static_cast<int>(directed.size() + undirected.size());
  const int t = static_cast<int>(true_edges.size());
  const int neg = d * (d - 1) / 2 - t;

  causalforge::MetricsReport m;
  m.nnz = nnz;
  m.fdr = static_cast<double>(rev + fp) / std::max(1, nnz);
  m.tpr = static_cast<double>(tp) / std::max(1, t);
  m.fpr = static_cast<double>(rev + fp) / std::max(1, neg);
  m.precision = static_cast<double>(tp) / std::max(1, nnz);
  m.recall = m.tpr;
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2 * m.precision * m.recall / (m.precision + m.recall);
  m.shd = fp + fn + rev;
  m.gscore = static_cast<double>(std::max(0, tp - fp)) / std::max(1, t);
  return m;
}

Matrix linear_sem_covariance(const Matrix &w, double noise_var) {
  const auto d = w.rows();
  const Matrix inv = (Matrix::Identity(d, d) - w).inverse();
  return noise_var * inv.transpose() * inv;
}

std::vector<int> random_permutation(int d, std::mt19937_64 &rng) {
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

IntMatrix random_dag(int d, double p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(p);
  const auto order = random_permutation(d, rng);
  IntMatrix g = IntMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      if (coin(rng)) g(order[a], order[b]) = 1;
    }
  }
  return g;
}

IntMatrix random_pdag(int d, double p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(p);
  IntMatrix g = IntMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && coin(rng)) g(i, j) = 1;
    }
  }
  return g;
}

} // namespace oracle
