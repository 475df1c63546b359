#pragma once

#include <random>

#include "causalforge/pipeline.hpp"

namespace fixture {

/// Random consistent prior on d nodes: required edges follow a random
/// order, forbidden edges are arbitrary, and the two never overlap.
causalforge::PriorKnowledge random_prior(int d, std::mt19937_64 &rng, int max_edges = 4);

/// A small simulate-source task (d in [4, 7], n = 500) cycling through the
/// five algorithms by `index`, with a random prior and optional
/// neighborhood selection and threshold override.
causalforge::TaskConfig random_task(int index, std::mt19937_64 &rng);

/// Forbidden edges absent, required edges present and directed, directed
/// part acyclic. Works for DAG and CPDAG adjacency alike.
bool prior_respected(const causalforge::IntMatrix &graph, const causalforge::PriorKnowledge &prior);
bool directed_part_acyclic(const causalforge::IntMatrix &graph);

} // namespace fixture
