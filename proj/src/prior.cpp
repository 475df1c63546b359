#include "causalforge/prior.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "causalforge/error.hpp"
#include "causalforge/gradient.hpp"
#include "causalforge/pc.hpp"

namespace causalforge {

namespace {

std::string edge_text(const Edge &e) { return std::to_string(e.from) + "->" + std::to_string(e.to); }

int span_of(const PriorKnowledge &p) {
  int d = 0;
  for (const auto *set : {&p.required, &p.forbidden}) {
    for (const auto &e : *set) d = std::max({d, e.from + 1, e.to + 1});
  }
  return d;
}

void check_consistent(const PriorKnowledge &p, int d) {
  for (const auto &e : p.required) {
    if (p.forbidden.contains(e)) {
      throw Error(ErrorCode::kPriorConflict, "edge " + edge_text(e) + " is both required and forbidden");
    }
  }
  if (find_directed_cycle(p.required_matrix(d))) {
    throw Error(ErrorCode::kPriorConflict, "required edges form a directed cycle");
  }
}

} // namespace

void PriorKnowledge::validate(int d) const {
  for (const auto *set : {&required, &forbidden}) {
    for (const auto &e : *set) {
      if (e.from < 0 || e.to < 0 || e.from >= d || e.to >= d) {
        throw Error(ErrorCode::kInvalidConfig, "prior edge " + edge_text(e) + " is out of range for d=" +
                                                   std::to_string(d));
      }
      if (e.from == e.to) throw Error(ErrorCode::kInvalidConfig, "prior edge " + edge_text(e) + " is a self loop");
    }
  }
  check_consistent(*this, d);
}

PriorKnowledge PriorKnowledge::merged(const PriorKnowledge &delta) const {
  PriorKnowledge out = *this;
  out.required.insert(delta.required.begin(), delta.required.end());
  out.forbidden.insert(delta.forbidden.begin(), delta.forbidden.end());
  check_consistent(out, span_of(out));
  return out;
}

IntMatrix PriorKnowledge::required_matrix(int d) const {
  IntMatrix m = IntMatrix::Zero(d, d);
  for (const auto &e : required) {
    if (e.from < d && e.to < d) m(e.from, e.to) = 1;
  }
  return m;
}

IntMatrix apply_prior_pre(const IntMatrix &mask, const PriorKnowledge &prior, int d) {
  prior.validate(d);
  IntMatrix allowed = IntMatrix::Ones(d, d);
  if (mask.size() != 0) {
    if (mask.rows() != d || mask.cols() != d) throw Error(ErrorCode::kShapeError, "mask has the wrong shape");
    allowed = (mask.array() != 0).cast<int>();
  }
  for (const auto &e : prior.forbidden) allowed(e.from, e.to) = 0;
  for (const auto &e : prior.required) allowed(e.from, e.to) = 1;
  allowed.diagonal().setZero();
  return allowed;
}

WeightedGraph apply_prior_post(const WeightedGraph &g, const PriorKnowledge &prior) {
  const int d = g.size();
  prior.validate(d);
  if (prior.empty()) return g;
  Matrix w = g.weights();
  for (const auto &e : prior.forbidden) w(e.from, e.to) = 0.0;

  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w.data()[k] != 0.0) smallest = std::min(smallest, std::abs(w.data()[k]));
  }
  if (!std::isfinite(smallest)) smallest = 1.0;
  for (const auto &e : prior.required) {
    if (w(e.from, e.to) == 0.0) w(e.from, e.to) = smallest;
  }
  const IntMatrix required = prior.required_matrix(d);
  remove_cycles_by_weight(w, &required);
  return WeightedGraph(std::move(w));
}

BinaryGraph apply_prior_post(const BinaryGraph &g, const PriorKnowledge &prior) {
  return apply_prior_post(WeightedGraph(g.adjacency().cast<double>()), prior).support();
}

void impose_prior_on_pdag(PdagMatrix &pdag, const PriorKnowledge &prior) {
  for (const auto &e : prior.required) {
    pdag(e.from, e.to) = 1;
    pdag(e.to, e.from) = 0;
  }
  for (const auto &e : prior.forbidden) {
    // An undirected pair with one forbidden direction keeps the other one;
    // a forbidden directed edge is dropped.
    pdag(e.from, e.to) = 0;
  }
}

Cpdag apply_prior_post(const Cpdag &g, const PriorKnowledge &prior) {
  const int d = g.size();
  prior.validate(d);
  if (prior.empty()) return g;
  PdagMatrix pdag = g.adjacency();
  impose_prior_on_pdag(pdag, prior);
  return apply_meek_rules(std::move(pdag), &prior);
}

} // namespace causalforge
