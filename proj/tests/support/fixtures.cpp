#include "fixtures.hpp"

#include <algorithm>
#include <numeric>

#include "oracles.hpp"

namespace fixture {

using namespace causalforge;

PriorKnowledge random_prior(int d, std::mt19937_64 &rng, int max_edges) {
  PriorKnowledge prior;
  if (d < 2) return prior;
  const auto order = oracle::random_permutation(d, rng);
  std::vector<int> pos(d);
  for (int k = 0; k < d; ++k) pos[order[k]] = k;

  std::uniform_int_distribution<int> node(0, d - 1);
  std::uniform_int_distribution<int> count(0, max_edges);
  std::bernoulli_distribution require(0.5);
  const int wanted = count(rng);
  for (int attempt = 0; attempt < 10 * max_edges && static_cast<int>(prior.required.size() + prior.forbidden.size()) < wanted; ++attempt) {
    const int i = node(rng);
    const int j = node(rng);
    if (i == j) continue;
    if (prior.is_required(i, j) || prior.is_required(j, i) || prior.is_forbidden(i, j)) continue;
    if (require(rng)) {
      if (pos[i] > pos[j] || prior.is_forbidden(i, j)) continue;
      prior.required.insert({i, j});
    } else {
      prior.forbidden.insert({i, j});
    }
  }
  return prior;
}

TaskConfig random_task(int index, std::mt19937_64 &rng) {
  static const char *const names[] = {"pc", "ges", "direct_lingam", "notears", "golem"};
  std::uniform_int_distribution<int> dim(4, 7);
  std::uniform_int_distribution<std::uint64_t> seed(1, 1000000);
  std::bernoulli_distribution coin(0.3);

  TaskConfig cfg;
  const int d = dim(rng);
  SimulateSource sim;
  sim.graph.d = d;
  sim.graph.e = std::uniform_int_distribution<int>(0, d * (d - 1) / 2)(rng);
  sim.graph.seed = seed(rng);
  sim.n = 500;
  const std::string name = names[index % 5];
  sim.noise.family = name == "direct_lingam" ? NoiseFamily::kUniform : NoiseFamily::kGauss;
  cfg.source = sim;
  cfg.algorithm = default_algorithm(name);
  if (auto *g = std::get_if<GolemConfig>(&cfg.algorithm)) g->iterations = 2000;
  cfg.prior = random_prior(d, rng);
  cfg.neighborhood.enabled = coin(rng);
  if (coin(rng)) cfg.threshold = 0.2;
  cfg.seed = seed(rng);
  return cfg;
}

bool prior_respected(const IntMatrix &graph, const PriorKnowledge &prior) {
  for (const auto &e : prior.forbidden) {
    if (graph(e.from, e.to)) return false;
  }
  for (const auto &e : prior.required) {
    if (!graph(e.from, e.to) || graph(e.to, e.from)) return false;
  }
  return true;
}

bool directed_part_acyclic(const IntMatrix &graph) {
  IntMatrix directed = IntMatrix::Zero(graph.rows(), graph.cols());
  for (int i = 0; i < graph.rows(); ++i) {
    for (int j = 0; j < graph.cols(); ++j) directed(i, j) = graph(i, j) && !graph(j, i);
  }
  return oracle::acyclic(directed);
}

} // namespace fixture
