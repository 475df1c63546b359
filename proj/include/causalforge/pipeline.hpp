#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "causalforge/error.hpp"
#include "causalforge/ges.hpp"
#include "causalforge/gradient.hpp"
#include "causalforge/graph.hpp"
#include "causalforge/metrics.hpp"
#include "causalforge/pc.hpp"
#include "causalforge/prior.hpp"
#include "causalforge/simulation.hpp"
#include "causalforge/trace.hpp"

namespace causalforge {

inline constexpr int kSchemaVersion = 1;

struct SimulateSource {
  RandomGraphConfig graph;
  Mechanism mechanism = Mechanism::kLinear;
  NoiseSpec noise;
  long n = 1000;
};

struct CsvSource {
  std::string path;
  std::optional<std::string> truth_path;
};

using DataSource = std::variant<SimulateSource, CsvSource>;

struct LingamConfig {
  double prune_alpha = 0.05;
};

/// Algorithm choice and its hyperparameters in one value, so the two can
/// never disagree.
using AlgorithmConfig = std::variant<PcConfig, GesConfig, LingamConfig, NotearsConfig, GolemConfig>;

std::string algorithm_name(const AlgorithmConfig &algo);
/// Default configuration for "pc", "ges", "direct_lingam", "notears" or "golem".
AlgorithmConfig default_algorithm(std::string_view name);

struct NeighborhoodSelection {
  bool enabled = false;
  double lambda = 0.1;
};

struct TaskConfig {
  int schema_version = kSchemaVersion;
  DataSource source = SimulateSource{};
  AlgorithmConfig algorithm = NotearsConfig{};
  PriorKnowledge prior;
  NeighborhoodSelection neighborhood;
  std::optional<double> threshold; ///< overrides the algorithm's own threshold
  std::uint64_t seed = 0;          ///< data simulation seed
  std::optional<std::string> parent_id;

  void validate() const;
};

enum class GraphKind { kDag, kCpdag };

/// What a learner produced from one data matrix.
struct LearnOutput {
  std::optional<WeightedGraph> raw_weights; ///< before thresholding
  std::optional<WeightedGraph> weights;     ///< after thresholding and priors
  IntMatrix graph;                          ///< final DAG or CPDAG adjacency
  GraphKind kind = GraphKind::kDag;
  std::vector<TraceEntry> trace;
  bool converged = true;
  std::optional<std::vector<int>> causal_order;
};

struct TaskResult {
  TaskConfig config;
  LearnOutput output;
  std::optional<BinaryGraph> truth;
  std::optional<MetricsReport> metrics;
  double wall_clock_seconds = 0.0;
};

/// Failure inside run_task, tagged with the stage that raised it. `partial`
/// holds whatever was computed before the failure.
class TaskError : public Error {
public:
  TaskError(ErrorCode code, std::string stage, const std::string &message, nlohmann::json partial)
      : Error(code, stage + ": " + message), stage_(std::move(stage)), partial_(std::move(partial)) {}

  const std::string &stage() const noexcept { return stage_; }
  const nlohmann::json &partial() const noexcept { return partial_; }

private:
  std::string stage_;
  nlohmann::json partial_;
};

/// Per-target L1 regression (coordinate descent on the 1/n Gram matrix,
/// tolerance 1e-6) of each column on all others. mask(i,j) is 1 when either
/// regression keeps the other variable with |coefficient| > 1e-8.
IntMatrix neighborhood_select(const Matrix &x, double lambda);

/// Run one learner with priors, optional candidate mask and threshold
/// override. Used by run_task and the CLI `learn` command.
LearnOutput learn(const Matrix &x, const AlgorithmConfig &algorithm, const PriorKnowledge &prior,
                  const IntMatrix *mask, std::optional<double> threshold, const TraceSink &sink = {});

/// Source -> neighborhood selection -> priors -> algorithm -> post-processing
/// -> metrics (when a truth graph is known). Deterministic in the config.
TaskResult run_task(const TaskConfig &cfg, const TraceSink &sink = {});

} // namespace causalforge
