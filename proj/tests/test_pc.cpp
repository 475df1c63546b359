#include <doctest.h>

#include <random>
#include <vector>

#include "causalforge/error.hpp"
#include "causalforge/pc.hpp"
#include "causalforge/prior.hpp"
#include "causalforge/simulation.hpp"
#include "oracles.hpp"

using namespace causalforge;

namespace {

IntMatrix adj(int d, std::initializer_list<std::pair<int, int>> edges) {
  IntMatrix m = IntMatrix::Zero(d, d);
  for (auto [i, j] : edges) m(i, j) = 1;
  return m;
}

IntMatrix sym(int d, std::initializer_list<std::pair<int, int>> edges) {
  IntMatrix m = IntMatrix::Zero(d, d);
  for (auto [i, j] : edges) m(i, j) = m(j, i) = 1;
  return m;
}

bool directed_part_acyclic(const PdagMatrix &p) {
  IntMatrix directed = IntMatrix::Zero(p.rows(), p.cols());
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) directed(i, j) = p(i, j) && !p(j, i);
  }
  return oracle::acyclic(directed);
}

Matrix simulate_chain(long n, std::uint64_t seed) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 1.0;
  w(1, 2) = 1.0;
  return simulate_iid(WeightedGraph{w}, n, Mechanism::kLinear, {}, seed).x;
}

} // namespace

TEST_CASE("pc_skeleton with a d-separation oracle") {
  SUBCASE("collider") {
    const oracle::DSeparationCi ci(adj(3, {{0, 2}, {1, 2}}));
    const auto r = pc_skeleton(ci, {});
    CHECK(r.skeleton == sym(3, {{0, 2}, {1, 2}}));
    REQUIRE(r.sepsets.contains(0, 1));
    CHECK(r.sepsets.get(0, 1).empty());
  }
  SUBCASE("chain") {
    const oracle::DSeparationCi ci(adj(3, {{0, 1}, {1, 2}}));
    const auto r = pc_skeleton(ci, {});
    CHECK(r.skeleton == sym(3, {{0, 1}, {1, 2}}));
    REQUIRE(r.sepsets.contains(2, 0));
    CHECK(r.sepsets.get(0, 2) == std::vector<int>{1});
  }
  SUBCASE("complete independence") {
    const oracle::DSeparationCi ci(IntMatrix::Zero(4, 4));
    const auto r = pc_skeleton(ci, {});
    CHECK(r.skeleton.sum() == 0);
    CHECK(r.sepsets.size() == 6);
    for (const auto &[pair, s] : r.sepsets.entries()) CHECK(s.empty());
  }
}

TEST_CASE("sepsets never contain their own endpoints") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto dag = oracle::random_dag(7, 0.35, rng);
    const oracle::DSeparationCi ci(dag);
    const auto r = pc_skeleton(ci, {});
    for (const auto &[pair, s] : r.sepsets.entries()) {
      CHECK(r.skeleton(pair.first, pair.second) == 0);
      for (int v : s) {
        CHECK(v != pair.first);
        CHECK(v != pair.second);
      }
    }
  }
}

TEST_CASE("max_condition_size caps the search") {
  const oracle::DSeparationCi ci(adj(3, {{0, 1}, {1, 2}}));
  PcConfig cfg;
  cfg.max_condition_size = 0;
  const auto r = pc_skeleton(ci, cfg);
  CHECK(r.skeleton == sym(3, {{0, 1}, {1, 2}, {0, 2}}));
}

TEST_CASE("orient_v_structures examples") {
  SepsetTable collider;
  collider.set(0, 1, {});
  CHECK(orient_v_structures(sym(3, {{0, 2}, {1, 2}}), collider) == adj(3, {{0, 2}, {1, 2}}));

  SepsetTable chain;
  chain.set(0, 2, {1});
  CHECK(orient_v_structures(sym(3, {{0, 1}, {1, 2}}), chain) == sym(3, {{0, 1}, {1, 2}}));

  CHECK(orient_v_structures(IntMatrix::Zero(3, 3), SepsetTable{}).sum() == 0);
}

TEST_CASE("conflicting v-structures leave the shared edge undirected") {
  // 0 - 2 - 1 - 3 with every nonadjacent pair marginally independent: the
  // triple (0,2,1) wants 1->2 and the triple (2,1,3) wants 2->1.
  SepsetTable s;
  s.set(0, 1, {});
  s.set(2, 3, {});
  s.set(0, 3, {});
  const auto p = orient_v_structures(sym(4, {{0, 2}, {2, 1}, {1, 3}}), s);
  CHECK(p(0, 2) == 1);
  CHECK(p(2, 0) == 0);
  CHECK(p(3, 1) == 1);
  CHECK(p(1, 3) == 0);
  CHECK(p(1, 2) == 1);
  CHECK(p(2, 1) == 1);
}

TEST_CASE("pairs without a sepset never form colliders") {
  const auto p = orient_v_structures(sym(3, {{0, 2}, {1, 2}}), SepsetTable{});
  CHECK(p == sym(3, {{0, 2}, {1, 2}}));
}

TEST_CASE("apply_meek_rules examples") {
  PdagMatrix r1 = adj(3, {{0, 1}});
  r1(1, 2) = r1(2, 1) = 1;
  CHECK(apply_meek_rules(r1).adjacency() == adj(3, {{0, 1}, {1, 2}}));

  PdagMatrix r2 = adj(3, {{0, 1}, {1, 2}});
  r2(0, 2) = r2(2, 0) = 1;
  CHECK(apply_meek_rules(r2).adjacency() == adj(3, {{0, 1}, {1, 2}, {0, 2}}));

  const PdagMatrix fixed = adj(4, {{0, 1}, {2, 1}, {1, 3}});
  CHECK(apply_meek_rules(fixed).adjacency() == fixed);
}

TEST_CASE("pc with a d-separation oracle recovers the equivalence class") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> density(0.1, 0.9);
  for (int rep = 0; rep < 60; ++rep) {
    const auto dag = oracle::random_dag(dim(rng), density(rng), rng);
    const oracle::DSeparationCi ci(dag);
    const auto expected = dag_to_cpdag(BinaryGraph{dag});
    for (auto variant : {PcVariant::kStable, PcVariant::kOriginal}) {
      PcConfig cfg;
      cfg.variant = variant;
      const auto got = pc(ci, cfg);
      CHECK(got == expected);
      CHECK(directed_part_acyclic(got.adjacency()));
    }
  }
}

TEST_CASE("pc agrees with the brute-force equivalence class on small graphs") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 25; ++rep) {
    const auto dag = oracle::random_dag(5, 0.5, rng);
    const oracle::DSeparationCi ci(dag);
    CHECK(pc(ci, {}).adjacency() == oracle::equivalence_class_cpdag(dag));
  }
}

TEST_CASE("stable skeleton is invariant to variable order") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 7;
    const auto dag = oracle::random_dag(d, 0.4, rng);
    const auto perm = oracle::random_permutation(d, rng);
    // A deliberately lossy oracle: only test up to level 1 so the
    // skeleton differs from the truth and order effects could show.
    PcConfig cfg;
    cfg.max_condition_size = 1;
    const auto a = pc_skeleton(oracle::DSeparationCi(dag), cfg);
    const auto b = pc_skeleton(oracle::DSeparationCi(oracle::relabel(dag, perm)), cfg);
    CHECK(oracle::relabel(a.skeleton, perm) == b.skeleton);
  }
}

TEST_CASE("pc on Gaussian data") {
  const Matrix x = simulate_chain(10000, 3);
  const auto g = pc(x, {});
  CHECK(g.adjacency() == sym(3, {{0, 1}, {1, 2}}));

  PriorKnowledge prior;
  prior.required.insert({0, 1});
  const auto guided = pc(x, {}, &prior);
  CHECK(guided.is_directed(0, 1));
  CHECK(guided.adjacent(1, 2));
  CHECK_FALSE(guided.adjacent(0, 2));
}

TEST_CASE("pc on one variable is empty") {
  const Matrix x = Matrix::Random(50, 1);
  const auto g = pc(x, {});
  CHECK(g.size() == 1);
  CHECK(g.num_edges() == 0);
}

TEST_CASE("pc priors") {
  const Matrix x = simulate_chain(5000, 4);

  PriorKnowledge both;
  both.forbidden.insert({0, 1});
  both.forbidden.insert({1, 0});
  CHECK_FALSE(pc(x, {}, &both).adjacent(0, 1));

  PriorKnowledge one;
  one.forbidden.insert({0, 1});
  const auto g = pc(x, {}, &one);
  CHECK(g.is_directed(1, 0));

  PriorKnowledge conflict;
  conflict.required.insert({0, 1});
  conflict.forbidden.insert({0, 1});
  try {
    pc(x, {}, &conflict);
    FAIL("expected PriorConflict");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kPriorConflict);
  }

  // A required edge between independent variables survives the tests.
  Matrix indep = simulate_iid(WeightedGraph{3}, 3000, Mechanism::kLinear, {}, 8).x;
  PriorKnowledge req;
  req.required.insert({2, 0});
  const auto r = pc(indep, {}, &req);
  CHECK(r.is_directed(2, 0));
}

TEST_CASE("pc output is always a valid CPDAG shape on data") {
  RandomGraphConfig cfg;
  cfg.d = 8;
  cfg.e = 12;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    cfg.seed = seed;
    const auto ds = simulate_iid(random_dag(cfg), 500, Mechanism::kLinear, {}, seed);
    for (auto variant : {PcVariant::kStable, PcVariant::kOriginal}) {
      PcConfig pcfg;
      pcfg.variant = variant;
      const auto g = pc(ds.x, pcfg);
      CHECK(directed_part_acyclic(g.adjacency()));
      CHECK((g.adjacency().diagonal().array() == 0).all());
    }
  }
}

TEST_CASE("PcConfig validation") {
  PcConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.alpha = 0.01;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_condition_size = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("FisherZCiTest reports InsufficientSamples") {
  const Matrix x = Matrix::Random(5, 4);
  const FisherZCiTest ci(x, 0.05);
  const std::vector<int> given{2, 3};
  try {
    ci.test(0, 1, given);
    FAIL("expected InsufficientSamples");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kInsufficientSamples);
  }
}
