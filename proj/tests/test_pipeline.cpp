#include <doctest.h>

#include <filesystem>
#include <random>

#include "causalforge/io.hpp"
#include "causalforge/pipeline.hpp"
#include "fixtures.hpp"

using namespace causalforge;
namespace fs = std::filesystem;

namespace {

TaskConfig toy_config(std::string_view algo) {
  TaskConfig cfg;
  SimulateSource sim;
  sim.graph.d = 10;
  sim.graph.e = 20;
  sim.graph.seed = 1;
  sim.n = 2000;
  cfg.source = sim;
  cfg.algorithm = default_algorithm(algo);
  cfg.seed = 1;
  return cfg;
}

Matrix chain_data(long n, std::uint64_t seed) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 1.5;
  w(1, 2) = 1.5;
  return simulate_iid(WeightedGraph{w}, n, Mechanism::kLinear, {}, seed).x;
}

fs::path scratch_dir(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("causalforge_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("neighborhood_select examples") {
  const Matrix x = chain_data(10000, 1);
  const IntMatrix full = neighborhood_select(x, 0.0);
  CHECK(full.sum() == 6);
  CHECK(full.diagonal().sum() == 0);

  const Matrix indep = simulate_iid(WeightedGraph{4}, 10000, Mechanism::kLinear, {}, 2).x;
  CHECK(neighborhood_select(indep, 0.1).sum() == 0);

  // On the population covariance of x0 -> x1 -> x2 with weights (a, b), the
  // KKT residual of x2 in the lasso of x0 on (x1, x2) is lambda * b, so the
  // pair {0, 2} is excluded only for b < 1. a = 1, b = 0.5 leaves a 0.05
  // margin in both regressions.
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 1.0;
  w(1, 2) = 0.5;
  const Matrix weak_tail = simulate_iid(WeightedGraph{w}, 100000, Mechanism::kLinear, {}, 3).x;
  const IntMatrix chain = neighborhood_select(weak_tail, 0.1);
  CHECK(chain(0, 1) == 1);
  CHECK(chain(1, 0) == 1);
  CHECK(chain(1, 2) == 1);
  CHECK(chain(2, 1) == 1);
  CHECK(chain(0, 2) == 0);
  CHECK(chain(2, 0) == 0);
  CHECK(chain == chain.transpose());
}

TEST_CASE("neighborhood_select keeps the true skeleton on strong data") {
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomGraphConfig cfg;
    cfg.d = 6;
    cfg.e = 6;
    cfg.seed = seed;
    const auto ds = simulate_iid(random_dag(cfg), 100000, Mechanism::kLinear, {}, seed);
    const IntMatrix mask = neighborhood_select(ds.x, 0.1);
    const IntMatrix skel = skeleton_of(ds.b.adjacency());
    if ((mask.array() >= skel.array()).all()) ++covered;
  }
  CHECK(covered == 5);
}

TEST_CASE("apply_prior examples") {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 0.8;
  w(1, 2) = -0.6;
  CHECK(apply_prior_post(WeightedGraph{w}, {}) == WeightedGraph{w});

  PriorKnowledge forbid;
  forbid.forbidden.insert({0, 1});
  const auto f = apply_prior_post(WeightedGraph{w}, forbid);
  CHECK(f.weight(0, 1) == 0.0);
  CHECK(f.weight(1, 2) == -0.6);
  CHECK(f.num_edges() == 1);

  PriorKnowledge req;
  req.required = {{0, 1}, {1, 2}};
  const auto r = apply_prior_post(BinaryGraph{3}, req);
  CHECK(r.num_edges() == 2);
  CHECK(r.has_edge(0, 1));
  CHECK(r.has_edge(1, 2));
  CHECK(is_dag(r));

  const IntMatrix pre = apply_prior_pre(IntMatrix{}, forbid, 3);
  CHECK(pre(0, 1) == 0);
  CHECK(pre(1, 0) == 1);
  CHECK(pre.diagonal().sum() == 0);
}

TEST_CASE("run_task on the toy configuration populates metrics") {
  const auto r = run_task(toy_config("notears"));
  REQUIRE(r.metrics);
  REQUIRE(r.truth);
  CHECK(r.truth->num_edges() == 20);
  CHECK(r.output.kind == GraphKind::kDag);
  CHECK(r.output.raw_weights);
  CHECK(r.output.weights);
  CHECK(r.output.converged);
  CHECK_FALSE(r.output.trace.empty());
  CHECK(r.metrics->shd <= 10);
}

TEST_CASE("run_task on a CSV without truth") {
  const auto dir = scratch_dir("csv");
  save_csv(dir / "X.csv", default_header(3), chain_data(2000, 4));
  TaskConfig cfg;
  cfg.source = CsvSource{(dir / "X.csv").string(), std::nullopt};
  cfg.algorithm = default_algorithm("pc");
  const auto r = run_task(cfg);
  CHECK_FALSE(r.metrics);
  CHECK_FALSE(r.truth);
  CHECK(r.output.graph.rows() == 3);
  CHECK(r.output.kind == GraphKind::kCpdag);
  CHECK(r.output.graph.sum() > 0);
}

TEST_CASE("a forbidden true edge never appears") {
  for (const char *algo : {"pc", "ges", "direct_lingam", "notears", "golem"}) {
    TaskConfig cfg = toy_config(algo);
    auto &sim = std::get<SimulateSource>(cfg.source);
    sim.graph.d = 6;
    sim.graph.e = 8;
    sim.n = 1000;
    if (std::string_view(algo) == "direct_lingam") sim.noise.family = NoiseFamily::kUniform;
    if (auto *g = std::get_if<GolemConfig>(&cfg.algorithm)) g->iterations = 3000;
    const BinaryGraph truth = random_dag(sim.graph).support();
    const Edge e = truth.edges().front();
    cfg.prior.forbidden.insert(e);
    const auto r = run_task(cfg);
    CAPTURE(algo);
    CHECK(r.output.graph(e.from, e.to) == 0);
  }
}

TEST_CASE("random tasks respect their priors and replay identically") {
  std::mt19937_64 rng(123);
  for (int k = 0; k < 15; ++k) {
    const TaskConfig cfg = fixture::random_task(k, rng);
    CAPTURE(task_config_to_json(cfg).dump());
    const auto a = run_task(cfg);
    CHECK(fixture::prior_respected(a.output.graph, cfg.prior));
    CHECK(fixture::directed_part_acyclic(a.output.graph));
    const auto b = run_task(cfg);
    CHECK(task_result_to_json(a, false).dump() == task_result_to_json(b, false).dump());
  }
}

TEST_CASE("run_task tags the failing stage") {
  TaskConfig cfg = toy_config("pc");
  cfg.prior.required = {{0, 1}};
  cfg.prior.forbidden = {{0, 1}};
  try {
    run_task(cfg);
    FAIL("expected TaskError");
  } catch (const TaskError &e) {
    CHECK(e.code() == ErrorCode::kPriorConflict);
    CHECK(e.partial().contains("config"));
  }

  TaskConfig missing;
  missing.source = CsvSource{"/nonexistent/x.csv", std::nullopt};
  try {
    run_task(missing);
    FAIL("expected TaskError");
  } catch (const TaskError &e) {
    CHECK(e.stage() == "source");
  }

  TaskConfig conflicting = toy_config("pc");
  conflicting.prior.required = {{0, 1}, {1, 0}};
  CHECK_THROWS_AS(run_task(conflicting), TaskError);
}

TEST_CASE("learn honours a threshold override and the mask policy") {
  const Matrix x = chain_data(3000, 6);
  const auto loose = learn(x, default_algorithm("notears"), {}, nullptr, 0.0);
  const auto strict = learn(x, default_algorithm("notears"), {}, nullptr, 10.0);
  CHECK(strict.graph.sum() == 0);
  CHECK(loose.graph.sum() >= 2);

  IntMatrix mask = IntMatrix::Zero(3, 3);
  const auto masked = learn(x, default_algorithm("notears"), {}, &mask, std::nullopt);
  CHECK(masked.graph.sum() == 0);
  const auto ges_masked = learn(x, default_algorithm("ges"), {}, &mask, std::nullopt);
  CHECK(ges_masked.graph.sum() > 0);
}

TEST_CASE("algorithm names") {
  for (const char *name : {"pc", "ges", "direct_lingam", "notears", "golem"}) {
    CHECK(algorithm_name(default_algorithm(name)) == name);
  }
  CHECK(algorithm_name(default_algorithm("lingam")) == "direct_lingam");
  CHECK_THROWS_AS(default_algorithm("icalingam"), Error);
}
