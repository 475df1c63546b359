#include "causalforge/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "causalforge/error.hpp"

namespace causalforge {

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void format_error(const std::string &message) { throw Error(ErrorCode::kFormatError, message); }
[[noreturn]] void config_error(const std::string &message) { throw Error(ErrorCode::kInvalidConfig, message); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) format_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_keys(const Json &obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) config_error(std::string(where) + " must be an object");
  for (const auto &[key, value] : obj.items()) {
    bool known = false;
    for (const auto a : allowed) known = known || key == a;
    if (!known) config_error("unknown key '" + key + "' in " + std::string(where));
  }
}

template <class T> void read_opt(const Json &obj, const char *key, T &out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

template <class T> void read_opt(const Json &obj, const char *key, std::optional<T> &out) {
  if (auto it = obj.find(key); it != obj.end()) {
    out = it->is_null() ? std::nullopt : std::optional<T>(it->get<T>());
  }
}

template <class T> Json opt_json(const std::optional<T> &v) { return v ? Json(*v) : Json(nullptr); }

Json edge_list(const std::set<Edge> &edges) {
  Json out = Json::array();
  for (const auto &e : edges) out.push_back({e.from, e.to});
  return out;
}

std::set<Edge> edges_from(const Json &value, const char *what) {
  std::set<Edge> out;
  if (value.is_null()) return out;
  if (!value.is_array()) config_error(std::string(what) + " must be a list of [i, j] pairs");
  for (const auto &pair : value) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      config_error(std::string(what) + " entries must be [i, j] integer pairs");
    }
    out.insert({pair[0].get<int>(), pair[1].get<int>()});
  }
  return out;
}

Json graph_config_to_json(const RandomGraphConfig &g) {
  return {{"model", graph_model_name(g.model)}, {"d", g.d},   {"e", g.e}, {"rank", g.rank},
          {"weight_range", {g.weight_lo, g.weight_hi}}, {"seed", g.seed}};
}

RandomGraphConfig graph_config_from_json(const Json &j, std::uint64_t default_seed) {
  check_keys(j, {"model", "d", "e", "rank", "weight_range", "seed"}, "graph");
  RandomGraphConfig g;
  g.seed = default_seed;
  if (auto it = j.find("model"); it != j.end()) g.model = parse_graph_model(it->get<std::string>());
  read_opt(j, "d", g.d);
  read_opt(j, "e", g.e);
  read_opt(j, "rank", g.rank);
  read_opt(j, "seed", g.seed);
  if (auto it = j.find("weight_range"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) config_error("weight_range must be [lo, hi]");
    g.weight_lo = (*it)[0].get<double>();
    g.weight_hi = (*it)[1].get<double>();
  }
  return g;
}

Json noise_to_json(const NoiseSpec &n) { return {{"family", noise_family_name(n.family)}, {"scale", n.scale}}; }

NoiseSpec noise_from_json(const Json &j) {
  NoiseSpec n;
  if (j.is_string()) {
    n.family = parse_noise_family(j.get<std::string>());
    return n;
  }
  check_keys(j, {"family", "scale"}, "noise");
  if (auto it = j.find("family"); it != j.end()) n.family = parse_noise_family(it->get<std::string>());
  read_opt(j, "scale", n.scale);
  return n;
}

Json source_to_json(const DataSource &source) {
  return std::visit(Overloaded{
                        [](const SimulateSource &s) -> Json {
                          return {{"source", "simulate"},
                                  {"graph", graph_config_to_json(s.graph)},
                                  {"sem", mechanism_name(s.mechanism)},
                                  {"noise", noise_to_json(s.noise)},
                                  {"n", s.n}};
                        },
                        [](const CsvSource &s) -> Json {
                          return {{"source", "csv"}, {"path", s.path}, {"truth_path", opt_json(s.truth_path)}};
                        },
                    },
                    source);
}

DataSource source_from_json(const Json &j, std::uint64_t seed) {
  if (!j.is_object()) config_error("data must be an object");
  const std::string kind = j.value("source", "simulate");
  if (kind == "simulate") {
    check_keys(j, {"source", "graph", "sem", "noise", "n"}, "data");
    SimulateSource s;
    s.graph = graph_config_from_json(j.value("graph", Json::object()), seed);
    if (auto it = j.find("sem"); it != j.end()) s.mechanism = parse_mechanism(it->get<std::string>());
    if (auto it = j.find("noise"); it != j.end()) s.noise = noise_from_json(*it);
    read_opt(j, "n", s.n);
    return s;
  }
  if (kind == "csv") {
    check_keys(j, {"source", "path", "truth_path"}, "data");
    CsvSource s;
    read_opt(j, "path", s.path);
    read_opt(j, "truth_path", s.truth_path);
    return s;
  }
  config_error("unknown data source '" + kind + "'");
}

Json graph_with_kind(const IntMatrix &adj, GraphKind kind) {
  Json g = graph_to_json(adj);
  g["kind"] = kind == GraphKind::kDag ? "dag" : "cpdag";
  return g;
}

} // namespace

// CSV ---------------------------------------------------------------------------

CsvDataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) format_error("empty CSV input");

  CsvDataset out;
  for (const auto field : split_fields(lines.front())) out.header.emplace_back(field);
  const auto d = static_cast<Eigen::Index>(out.header.size());
  if (lines.size() < 2) format_error("CSV input has a header but no data rows");

  out.values.resize(static_cast<Eigen::Index>(lines.size() - 1), d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    const std::string where = "line " + std::to_string(r + 1);
    if (static_cast<Eigen::Index>(fields.size()) != d) {
      format_error(where + ": expected " + std::to_string(d) + " fields, found " + std::to_string(fields.size()));
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto cell = fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        format_error(where + ", column " + std::to_string(c + 1) + ": not a finite number '" + std::string(cell) +
                     "'");
      }
      out.values(static_cast<Eigen::Index>(r - 1), c) = v;
    }
  }
  return out;
}

CsvDataset load_csv(const std::filesystem::path &path) { return parse_csv(read_text(path)); }

std::string format_csv(const std::vector<std::string> &header, const Matrix &values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw Error(ErrorCode::kShapeError, "header and data differ in width");
  }
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      out += format_double(values(r, c));
    }
    out += '\n';
  }
  return out;
}

void save_csv(const std::filesystem::path &path, const std::vector<std::string> &header, const Matrix &values) {
  write_text_file(path, format_csv(header, values));
}

std::vector<std::string> default_header(int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

// Files -------------------------------------------------------------------------

Json read_json_file(const std::filesystem::path &path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error &e) {
    format_error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) format_error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) format_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_file(const std::filesystem::path &path, const Json &value) {
  write_text_file(path, value.dump(2) + "\n");
}

// Graphs ------------------------------------------------------------------------

Json graph_to_json(const Matrix &weights) {
  Json edges = Json::array();
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      if (weights(i, j) != 0.0) edges.push_back({i, j, weights(i, j)});
    }
  }
  return {{"d", weights.rows()}, {"edges", std::move(edges)}};
}

Json graph_to_json(const IntMatrix &adjacency) { return graph_to_json(Matrix(adjacency.cast<double>())); }

Matrix graph_from_json(const Json &value) {
  if (!value.is_object() || !value.contains("d") || !value["d"].is_number_integer()) {
    format_error("graph JSON needs an integer \"d\"");
  }
  const int d = value["d"].get<int>();
  if (d < 0) format_error("graph JSON has negative d");
  Matrix w = Matrix::Zero(d, d);
  const Json edges = value.value("edges", Json::array());
  if (!edges.is_array()) format_error("graph JSON \"edges\" must be a list");
  for (const auto &e : edges) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        (e.size() == 3 && !e[2].is_number())) {
      format_error("graph edge must be [i, j] or [i, j, weight]");
    }
    const int i = e[0].get<int>();
    const int j = e[1].get<int>();
    if (i < 0 || j < 0 || i >= d || j >= d || i == j) format_error("graph edge out of range or a self loop");
    w(i, j) = e.size() == 3 ? e[2].get<double>() : 1.0;
  }
  return w;
}

void save_dataset(const Dataset &data, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  save_csv(dir / "X.csv", default_header(data.w.size()), data.x);
  write_json_file(dir / "W.json", graph_to_json(data.w.weights()));
  write_json_file(dir / "B.json", graph_to_json(data.b.adjacency()));
  Json provenance = {{"schema_version", kSchemaVersion},
                     {"n", data.n},
                     {"sem", mechanism_name(data.mechanism)},
                     {"noise", noise_to_json(data.noise)},
                     {"seed", data.seed}};
  if (data.graph_config) provenance["graph"] = graph_config_to_json(*data.graph_config);
  write_json_file(dir / "provenance.json", provenance);
}

// Configs and results -----------------------------------------------------------

Json metrics_to_json(const MetricsReport &m) {
  return {{"fdr", m.fdr},       {"tpr", m.tpr},         {"fpr", m.fpr},
          {"shd", m.shd},       {"nnz", m.nnz},         {"precision", m.precision},
          {"recall", m.recall}, {"f1", m.f1},           {"gscore", m.gscore}};
}

MetricsReport metrics_from_json(const Json &value) {
  MetricsReport m;
  m.fdr = value.at("fdr").get<double>();
  m.tpr = value.at("tpr").get<double>();
  m.fpr = value.at("fpr").get<double>();
  m.shd = value.at("shd").get<int>();
  m.nnz = value.at("nnz").get<int>();
  m.precision = value.at("precision").get<double>();
  m.recall = value.at("recall").get<double>();
  m.f1 = value.at("f1").get<double>();
  m.gscore = value.at("gscore").get<double>();
  return m;
}

Json trace_to_json(const TraceEntry &entry) {
  Json out = {{"iteration", entry.iteration}, {"objective", entry.objective}};
  if (entry.h) out["h"] = *entry.h;
  if (entry.rho) out["rho"] = *entry.rho;
  return out;
}

Json prior_to_json(const PriorKnowledge &prior) {
  return {{"required", edge_list(prior.required)}, {"forbidden", edge_list(prior.forbidden)}};
}

PriorKnowledge prior_from_json(const Json &value) {
  PriorKnowledge prior;
  if (value.is_null()) return prior;
  check_keys(value, {"required", "forbidden"}, "prior");
  prior.required = edges_from(value.value("required", Json()), "required");
  prior.forbidden = edges_from(value.value("forbidden", Json()), "forbidden");
  return prior;
}

Json algorithm_to_json(const AlgorithmConfig &algo) {
  Json params = std::visit(
      Overloaded{
          [](const PcConfig &c) -> Json {
            return {{"alpha", c.alpha},
                    {"variant", c.variant == PcVariant::kStable ? "stable" : "original"},
                    {"max_condition_size", opt_json(c.max_condition_size)}};
          },
          [](const GesConfig &c) -> Json {
            return {{"penalty_discount", c.penalty_discount}, {"max_parents", opt_json(c.max_parents)}};
          },
          [](const LingamConfig &c) -> Json { return {{"prune_alpha", c.prune_alpha}}; },
          [](const NotearsConfig &c) -> Json {
            return {{"lambda1", c.lambda1},
                    {"h_tol", c.h_tol},
                    {"rho_max", c.rho_max},
                    {"max_dual_iters", c.max_dual_iters},
                    {"w_threshold", c.w_threshold}};
          },
          [](const GolemConfig &c) -> Json {
            return {{"lambda1", c.lambda1},       {"lambda2", c.lambda2},
                    {"equal_variance", c.equal_variance}, {"iterations", c.iterations},
                    {"learning_rate", c.learning_rate},   {"w_threshold", c.w_threshold}};
          },
      },
      algo);
  return {{"name", algorithm_name(algo)}, {"params", std::move(params)}};
}

AlgorithmConfig algorithm_from_json(std::string_view name, const Json &params_in) {
  const Json params = params_in.is_null() ? Json::object() : params_in;
  AlgorithmConfig algo = default_algorithm(name);
  try {
    std::visit(Overloaded{
                   [&](PcConfig &c) {
                     check_keys(params, {"alpha", "variant", "max_condition_size"}, "pc params");
                     read_opt(params, "alpha", c.alpha);
                     if (auto it = params.find("variant"); it != params.end()) {
                       const auto v = it->get<std::string>();
                       if (v == "stable") {
                         c.variant = PcVariant::kStable;
                       } else if (v == "original") {
                         c.variant = PcVariant::kOriginal;
                       } else {
                         config_error("pc variant must be 'stable' or 'original'");
                       }
                     }
                     read_opt(params, "max_condition_size", c.max_condition_size);
                   },
                   [&](GesConfig &c) {
                     check_keys(params, {"penalty_discount", "max_parents"}, "ges params");
                     read_opt(params, "penalty_discount", c.penalty_discount);
                     read_opt(params, "max_parents", c.max_parents);
                   },
                   [&](LingamConfig &c) {
                     check_keys(params, {"prune_alpha"}, "direct_lingam params");
                     read_opt(params, "prune_alpha", c.prune_alpha);
                   },
                   [&](NotearsConfig &c) {
                     check_keys(params, {"lambda1", "h_tol", "rho_max", "max_dual_iters", "w_threshold"},
                                "notears params");
                     read_opt(params, "lambda1", c.lambda1);
                     read_opt(params, "h_tol", c.h_tol);
                     read_opt(params, "rho_max", c.rho_max);
                     read_opt(params, "max_dual_iters", c.max_dual_iters);
                     read_opt(params, "w_threshold", c.w_threshold);
                   },
                   [&](GolemConfig &c) {
                     check_keys(params,
                                {"lambda1", "lambda2", "equal_variance", "iterations", "learning_rate", "w_threshold"},
                                "golem params");
                     read_opt(params, "lambda1", c.lambda1);
                     read_opt(params, "lambda2", c.lambda2);
                     read_opt(params, "equal_variance", c.equal_variance);
                     read_opt(params, "iterations", c.iterations);
                     read_opt(params, "learning_rate", c.learning_rate);
                     read_opt(params, "w_threshold", c.w_threshold);
                   },
               },
               algo);
  } catch (const Json::exception &e) {
    config_error(std::string(name) + " params: " + e.what());
  }
  return algo;
}

Json task_config_to_json(const TaskConfig &cfg) {
  Json ns = cfg.neighborhood.enabled ? Json{{"mode", "lasso"}, {"lambda", cfg.neighborhood.lambda}}
                                     : Json{{"mode", "off"}};
  return {{"schema_version", cfg.schema_version},
          {"seed", cfg.seed},
          {"data", source_to_json(cfg.source)},
          {"algorithm", algorithm_to_json(cfg.algorithm)},
          {"prior", prior_to_json(cfg.prior)},
          {"neighborhood_selection", std::move(ns)},
          {"threshold", opt_json(cfg.threshold)},
          {"parent_id", opt_json(cfg.parent_id)}};
}

TaskConfig task_config_from_json(const Json &value) {
  TaskConfig cfg;
  try {
    check_keys(value,
               {"schema_version", "seed", "data", "algorithm", "prior", "neighborhood_selection", "threshold",
                "parent_id"},
               "task config");
    read_opt(value, "schema_version", cfg.schema_version);
    read_opt(value, "seed", cfg.seed);
    cfg.source = source_from_json(value.value("data", Json::object()), cfg.seed);

    const Json algo = value.value("algorithm", Json{{"name", "notears"}});
    if (algo.is_string()) {
      cfg.algorithm = default_algorithm(algo.get<std::string>());
    } else {
      check_keys(algo, {"name", "params"}, "algorithm");
      if (!algo.contains("name")) config_error("algorithm needs a name");
      cfg.algorithm = algorithm_from_json(algo["name"].get<std::string>(), algo.value("params", Json::object()));
    }

    cfg.prior = prior_from_json(value.value("prior", Json()));
    if (auto it = value.find("neighborhood_selection"); it != value.end() && !it->is_null()) {
      check_keys(*it, {"mode", "lambda"}, "neighborhood_selection");
      const std::string mode = it->value("mode", "off");
      if (mode == "lasso") {
        cfg.neighborhood.enabled = true;
        read_opt(*it, "lambda", cfg.neighborhood.lambda);
      } else if (mode != "off") {
        config_error("neighborhood_selection mode must be 'off' or 'lasso'");
      }
    }
    read_opt(value, "threshold", cfg.threshold);
    read_opt(value, "parent_id", cfg.parent_id);
  } catch (const Json::exception &e) {
    config_error(std::string("task config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json task_result_to_json(const TaskResult &result, bool include_timing) {
  const LearnOutput &o = result.output;
  Json trace = Json::array();
  for (const auto &entry : o.trace) trace.push_back(trace_to_json(entry));
  Json out = {{"schema_version", kSchemaVersion},
              {"config", task_config_to_json(result.config)},
              {"algorithm", algorithm_name(result.config.algorithm)},
              {"graph", graph_with_kind(o.graph, o.kind)},
              {"trace", std::move(trace)},
              {"converged", o.converged}};
  if (o.weights) out["weights"] = graph_to_json(o.weights->weights());
  if (o.raw_weights) out["raw_weights"] = graph_to_json(o.raw_weights->weights());
  if (o.causal_order) out["causal_order"] = *o.causal_order;
  if (result.truth) out["truth"] = graph_to_json(result.truth->adjacency());
  if (result.metrics) out["metrics"] = metrics_to_json(*result.metrics);
  if (include_timing) out["wall_clock_seconds"] = result.wall_clock_seconds;
  return out;
}

} // namespace causalforge
