#include <doctest.h>

#include <random>

#include "causalforge/error.hpp"
#include "causalforge/metrics.hpp"
#include "oracles.hpp"

using namespace causalforge;

namespace {

IntMatrix adj(int d, std::initializer_list<std::pair<int, int>> edges) {
  IntMatrix m = IntMatrix::Zero(d, d);
  for (auto [i, j] : edges) m(i, j) = 1;
  return m;
}

void check_same(const MetricsReport &a, const MetricsReport &b) {
  CHECK(a.fdr == b.fdr);
  CHECK(a.tpr == b.tpr);
  CHECK(a.fpr == b.fpr);
  CHECK(a.shd == b.shd);
  CHECK(a.nnz == b.nnz);
  CHECK(a.precision == b.precision);
  CHECK(a.recall == b.recall);
  CHECK(a.f1 == b.f1);
  CHECK(a.gscore == b.gscore);
}

// Undirected estimated pairs take the true orientation when one exists.
IntMatrix normalized(const IntMatrix &est, const IntMatrix &truth) {
  IntMatrix out = est;
  for (int i = 0; i < est.rows(); ++i) {
    for (int j = 0; j < est.cols(); ++j) {
      if (est(i, j) && est(j, i) && truth(i, j)) out(j, i) = 0;
    }
  }
  return out;
}

} // namespace

TEST_CASE("identical graphs score perfectly") {
  const BinaryGraph truth{adj(4, {{0, 1}, {1, 2}, {0, 3}})};
  const auto m = evaluate(truth, truth);
  CHECK(m.fdr == 0.0);
  CHECK(m.tpr == 1.0);
  CHECK(m.fpr == 0.0);
  CHECK(m.shd == 0);
  CHECK(m.f1 == 1.0);
  CHECK(m.gscore == 1.0);
  CHECK(m.nnz == 3);
}

TEST_CASE("one reversed edge") {
  const BinaryGraph truth{adj(3, {{0, 1}, {1, 2}})};
  const auto counts = count_edges(adj(3, {{0, 1}, {2, 1}}), truth);
  CHECK(counts.true_positive == 1);
  CHECK(counts.reversed == 1);
  CHECK(counts.false_positive == 0);
  CHECK(counts.false_negative == 0);
  const auto m = evaluate(adj(3, {{0, 1}, {2, 1}}), truth);
  CHECK(m.fdr == 0.5);
  CHECK(m.tpr == 0.5);
  CHECK(m.shd == 1);
  CHECK(m.nnz == 2);
  CHECK(m.gscore == 0.5);
}

TEST_CASE("empty estimate") {
  const BinaryGraph truth{adj(3, {{0, 1}, {1, 2}})};
  const auto m = evaluate(IntMatrix::Zero(3, 3), truth);
  CHECK(m.tpr == 0.0);
  CHECK(m.shd == 2);
  CHECK(m.nnz == 0);
  CHECK(m.fdr == 0.0);
  CHECK(m.gscore == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("undirected estimated edges") {
  const BinaryGraph truth{adj(3, {{0, 1}, {1, 2}})};
  IntMatrix est = adj(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  const auto m = evaluate(est, truth);
  CHECK(m.nnz == 2);
  CHECK(m.tpr == 1.0);
  CHECK(m.shd == 0);

  IntMatrix spurious = adj(3, {{0, 2}, {2, 0}});
  const auto s = evaluate(spurious, truth);
  CHECK(s.nnz == 1);
  CHECK(s.shd == 3);
  CHECK(s.fdr == 1.0);
}

TEST_CASE("evaluate errors") {
  const BinaryGraph truth{adj(3, {{0, 1}})};
  try {
    evaluate(IntMatrix::Zero(4, 4), truth);
    FAIL("expected ShapeError");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShapeError);
  }
  try {
    evaluate(IntMatrix::Zero(2, 2), BinaryGraph{adj(2, {{0, 1}, {1, 0}})});
    FAIL("expected NotADag");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNotADag);
  }
}

TEST_CASE("metrics match an edge-by-edge enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> density(0.0, 0.8);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = dim(rng);
    const auto truth = oracle::random_dag(d, density(rng), rng);
    const auto est = oracle::random_pdag(d, density(rng), rng);
    check_same(evaluate(est, BinaryGraph{truth}), oracle::brute_force_metrics(est, truth));
  }
}

TEST_CASE("metric bounds and relabeling invariance") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + rep % 5;
    const auto truth = oracle::random_dag(d, 0.4, rng);
    const auto est = oracle::random_pdag(d, 0.3, rng);
    const auto m = evaluate(est, BinaryGraph{truth});
    for (double v : {m.fdr, m.tpr, m.precision, m.recall, m.f1, m.gscore}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.fpr >= 0.0);
    CHECK(m.tpr == m.recall);
    CHECK(m.shd <= truth.sum() + m.nnz);
    CHECK((m.shd == 0) == (normalized(est, truth) == truth));

    const auto perm = oracle::random_permutation(d, rng);
    check_same(evaluate(oracle::relabel(est, perm), BinaryGraph{oracle::relabel(truth, perm)}), m);
  }
}
