#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "causalforge/graph.hpp"
#include "causalforge/metrics.hpp"
#include "causalforge/pipeline.hpp"
#include "causalforge/simulation.hpp"

namespace causalforge {

using Json = nlohmann::json;

// CSV ---------------------------------------------------------------------------

struct CsvDataset {
  std::vector<std::string> header;
  Matrix values; ///< n x d
};

/// Comma-separated values with a header row. Throws FormatError naming the
/// line (and column for bad cells) on ragged rows, non-numeric or non-finite
/// cells, and empty input.
CsvDataset parse_csv(std::string_view text);
CsvDataset load_csv(const std::filesystem::path &path);

/// Every value written with 17 significant digits, so load_csv reproduces it.
std::string format_csv(const std::vector<std::string> &header, const Matrix &values);
void save_csv(const std::filesystem::path &path, const std::vector<std::string> &header, const Matrix &values);

/// x0, x1, ..., x{d-1}
std::vector<std::string> default_header(int d);

// Files -------------------------------------------------------------------------

Json read_json_file(const std::filesystem::path &path);
/// Writes to a temporary sibling and renames it over `path`.
void write_json_file(const std::filesystem::path &path, const Json &value);
void write_text_file(const std::filesystem::path &path, std::string_view text);

// Graphs ------------------------------------------------------------------------

/// {"d": d, "edges": [[i, j, w], ...]} in row-major order. An undirected
/// CPDAG edge appears as both (i, j) and (j, i).
Json graph_to_json(const Matrix &weights);
Json graph_to_json(const IntMatrix &adjacency);

/// Weighted adjacency from graph JSON. Throws FormatError.
Matrix graph_from_json(const Json &value);

/// X.csv, W.json, B.json and provenance.json in `dir` (created if needed).
void save_dataset(const Dataset &data, const std::filesystem::path &dir);

// Configs and results -----------------------------------------------------------

Json metrics_to_json(const MetricsReport &m);
MetricsReport metrics_from_json(const Json &value);

Json trace_to_json(const TraceEntry &entry);

Json prior_to_json(const PriorKnowledge &prior);
/// {"required": [[i, j], ...], "forbidden": [...]}; throws InvalidConfig.
PriorKnowledge prior_from_json(const Json &value);

/// {"name": ..., "params": {...}}
Json algorithm_to_json(const AlgorithmConfig &algo);
/// Unknown parameter names raise InvalidConfig.
AlgorithmConfig algorithm_from_json(std::string_view name, const Json &params);

Json task_config_to_json(const TaskConfig &cfg);
/// Throws InvalidConfig on malformed or inconsistent input.
TaskConfig task_config_from_json(const Json &value);

/// Wall-clock time is included only when `include_timing` is set, so two
/// replays serialize to the same bytes without it.
Json task_result_to_json(const TaskResult &result, bool include_timing = true);

} // namespace causalforge
