#pragma once

#include <set>

#include "causalforge/graph.hpp"

namespace causalforge {

/// User-supplied edge constraints. Pairs are ordered: {i, j} means i->j.
struct PriorKnowledge {
  std::set<Edge> required;
  std::set<Edge> forbidden;

  bool empty() const noexcept { return required.empty() && forbidden.empty(); }

  /// Indices in [0, d), no self loops, required and forbidden disjoint, and
  /// required edges acyclic. Throws InvalidConfig for bad indices and
  /// PriorConflict otherwise.
  void validate(int d) const;

  /// Union with `delta`; throws PriorConflict if the union is contradictory.
  PriorKnowledge merged(const PriorKnowledge &delta) const;

  bool is_required(int from, int to) const { return required.contains({from, to}); }
  bool is_forbidden(int from, int to) const { return forbidden.contains({from, to}); }

  /// 0/1 matrix with (i,j)=1 for each required i->j.
  IntMatrix required_matrix(int d) const;

  friend bool operator==(const PriorKnowledge &, const PriorKnowledge &) = default;
};

// Pre-stage -------------------------------------------------------------------

/// Directed candidate support: (i,j)=1 allows i->j to be estimated. Forbidden
/// entries are cleared and required entries forced on. An empty `mask` means
/// every off-diagonal entry is allowed.
IntMatrix apply_prior_pre(const IntMatrix &mask, const PriorKnowledge &prior, int d);

// Post-stage ------------------------------------------------------------------

/// Delete forbidden edges, insert missing required edges with the smallest
/// surviving |weight| (1.0 if none survive), then break remaining cycles by
/// deleting the weakest non-required edge on each.
WeightedGraph apply_prior_post(const WeightedGraph &g, const PriorKnowledge &prior);

/// As above with unit weights.
BinaryGraph apply_prior_post(const BinaryGraph &g, const PriorKnowledge &prior);

/// Orients undirected edges to match required edges, inserts missing
/// required edges, deletes forbidden orientations (an undirected pair with
/// one forbidden direction is oriented the other way) and re-runs the Meek
/// closure.
Cpdag apply_prior_post(const Cpdag &g, const PriorKnowledge &prior);

/// The PDAG part of the CPDAG rule, without the closure.
void impose_prior_on_pdag(PdagMatrix &pdag, const PriorKnowledge &prior);

} // namespace causalforge
