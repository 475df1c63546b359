#include "causalforge/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "causalforge/io.hpp"
#include "causalforge/lingam.hpp"
#include "causalforge/numeric.hpp"

namespace causalforge {

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kLassoTolerance = 1e-6;
constexpr double kLassoZero = 1e-8;
constexpr int kLassoMaxSweeps = 10000;

void check_threshold(double t, const char *what) {
  if (!std::isfinite(t) || t < 0.0) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " must be >= 0");
}

void validate_algorithm(const AlgorithmConfig &algo) {
  std::visit(Overloaded{
                 [](const LingamConfig &c) {
                   if (!(c.prune_alpha > 0.0 && c.prune_alpha <= 1.0)) {
                     throw Error(ErrorCode::kInvalidConfig, "prune_alpha must be in (0, 1]");
                   }
                 },
                 [](const auto &c) { c.validate(); },
             },
             algo);
}

int source_dimension(const DataSource &source) {
  if (const auto *sim = std::get_if<SimulateSource>(&source)) return sim->graph.d;
  return -1;
}

std::string strip_code(const Error &e) {
  const std::string what = e.what();
  const std::string prefix = std::string(e.code_name()) + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

LearnOutput learn_impl(const Matrix &x, const AlgorithmConfig &algorithm, const PriorKnowledge &prior,
                       const IntMatrix *mask, std::optional<double> threshold, const TraceSink &sink,
                       std::string &stage) {
  const int d = static_cast<int>(x.cols());
  prior.validate(d);
  if (threshold) check_threshold(*threshold, "threshold");
  if (mask && (mask->rows() != d || mask->cols() != d)) {
    throw Error(ErrorCode::kShapeError, "mask must be d x d");
  }
  LearnOutput out;

  auto learn_gradient = [&](auto &&fit, double default_threshold) {
    IntMatrix support;
    const bool restricted = mask != nullptr || !prior.empty();
    if (restricted) support = apply_prior_pre(mask ? *mask : IntMatrix(), prior, d);
    GradientResult fitted = fit(restricted ? &support : nullptr);
    stage = "postprocess";
    const IntMatrix required = prior.required_matrix(d);
    WeightedGraph w = threshold_weights(fitted.weights, threshold.value_or(default_threshold), &required);
    w = apply_prior_post(w, prior);
    out.raw_weights = std::move(fitted.weights);
    out.graph = w.support().adjacency();
    out.weights = std::move(w);
    out.trace = std::move(fitted.trace);
    out.converged = fitted.converged;
    out.kind = GraphKind::kDag;
  };

  std::visit(Overloaded{
                 [&](const PcConfig &cfg) {
                   const Cpdag g = pc(x, cfg, &prior, mask);
                   stage = "postprocess";
                   out.graph = apply_prior_post(g, prior).adjacency();
                   out.kind = GraphKind::kCpdag;
                 },
                 [&](const GesConfig &cfg) {
                   auto record = [&](const TraceEntry &e) {
                     out.trace.push_back(e);
                     if (sink) sink(e);
                   };
                   const GesResult r = ges(x, cfg, record);
                   stage = "postprocess";
                   out.graph = apply_prior_post(r.graph, prior).adjacency();
                   out.kind = GraphKind::kCpdag;
                 },
                 [&](const LingamConfig &cfg) {
                   LingamResult r = direct_lingam(x, cfg.prune_alpha);
                   stage = "postprocess";
                   const IntMatrix required = prior.required_matrix(d);
                   WeightedGraph w = threshold ? threshold_weights(r.weights, *threshold, &required) : r.weights;
                   w = apply_prior_post(w, prior);
                   out.raw_weights = std::move(r.weights);
                   out.graph = w.support().adjacency();
                   out.weights = std::move(w);
                   out.causal_order = std::move(r.causal_order);
                   out.kind = GraphKind::kDag;
                 },
                 [&](const NotearsConfig &cfg) {
                   learn_gradient([&](const IntMatrix *m) { return notears_linear(x, cfg, m, sink); },
                                  cfg.w_threshold);
                 },
                 [&](const GolemConfig &cfg) {
                   learn_gradient([&](const IntMatrix *m) { return golem(x, cfg, m, sink); }, cfg.w_threshold);
                 },
             },
             algorithm);
  return out;
}

} // namespace

std::string algorithm_name(const AlgorithmConfig &algo) {
  return std::visit(Overloaded{
                        [](const PcConfig &) { return "pc"; },
                        [](const GesConfig &) { return "ges"; },
                        [](const LingamConfig &) { return "direct_lingam"; },
                        [](const NotearsConfig &) { return "notears"; },
                        [](const GolemConfig &) { return "golem"; },
                    },
                    algo);
}

AlgorithmConfig default_algorithm(std::string_view name) {
  if (name == "pc") return PcConfig{};
  if (name == "ges") return GesConfig{};
  if (name == "direct_lingam" || name == "lingam") return LingamConfig{};
  if (name == "notears") return NotearsConfig{};
  if (name == "golem") return GolemConfig{};
  throw Error(ErrorCode::kInvalidConfig, "unknown algorithm '" + std::string(name) + "'");
}

void TaskConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kInvalidConfig, "unsupported schema_version " + std::to_string(schema_version));
  }
  std::visit(Overloaded{
                 [](const SimulateSource &s) {
                   s.graph.validate();
                   s.noise.validate();
                   if (s.n < 1) throw Error(ErrorCode::kInvalidConfig, "n must be positive");
                 },
                 [](const CsvSource &s) {
                   if (s.path.empty()) throw Error(ErrorCode::kInvalidConfig, "csv source needs a path");
                 },
             },
             source);
  validate_algorithm(algorithm);
  if (neighborhood.enabled) check_threshold(neighborhood.lambda, "neighborhood lambda");
  if (threshold) check_threshold(*threshold, "threshold");
  if (const int d = source_dimension(source); d >= 0) prior.validate(d);
}

IntMatrix neighborhood_select(const Matrix &x, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error(ErrorCode::kInvalidConfig, "lambda must be >= 0");
  if (x.rows() <= 3) throw Error(ErrorCode::kInsufficientSamples, "neighborhood selection needs n > 3");
  if (!x.allFinite()) throw Error(ErrorCode::kNumericError, "data contains non-finite values");
  const int d = static_cast<int>(x.cols());
  const Matrix c = covariance(center_columns(x));
  IntMatrix mask = IntMatrix::Zero(d, d);

  for (int j = 0; j < d; ++j) {
    Vector beta = Vector::Zero(d);
    Vector fitted = Vector::Zero(d); // c * beta
    for (int sweep = 0; sweep < kLassoMaxSweeps; ++sweep) {
      double max_change = 0.0;
      for (int k = 0; k < d; ++k) {
        if (k == j || c(k, k) <= 0.0) continue;
        const double rho = c(k, j) - (fitted[k] - c(k, k) * beta[k]);
        const double shrunk = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho);
        const double next = shrunk / c(k, k);
        const double delta = next - beta[k];
        if (delta != 0.0) {
          fitted += c.col(k) * delta;
          beta[k] = next;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < kLassoTolerance) break;
    }
    if (!beta.allFinite()) throw Error(ErrorCode::kNumericError, "lasso diverged");
    for (int k = 0; k < d; ++k) {
      if (k != j && std::abs(beta[k]) > kLassoZero) {
        mask(k, j) = 1;
        mask(j, k) = 1;
      }
    }
  }
  return mask;
}

LearnOutput learn(const Matrix &x, const AlgorithmConfig &algorithm, const PriorKnowledge &prior,
                  const IntMatrix *mask, std::optional<double> threshold, const TraceSink &sink) {
  validate_algorithm(algorithm);
  std::string stage;
  return learn_impl(x, algorithm, prior, mask, threshold, sink, stage);
}

TaskResult run_task(const TaskConfig &cfg, const TraceSink &sink) {
  const auto start = std::chrono::steady_clock::now();
  TaskResult result;
  result.config = cfg;
  std::string stage = "config";
  try {
    cfg.validate();

    stage = "source";
    Matrix x;
    if (const auto *sim = std::get_if<SimulateSource>(&cfg.source)) {
      const WeightedGraph w = random_dag(sim->graph);
      Dataset data = simulate_iid(w, sim->n, sim->mechanism, sim->noise, cfg.seed);
      x = std::move(data.x);
      result.truth = std::move(data.b);
    } else {
      const auto &csv = std::get<CsvSource>(cfg.source);
      x = load_csv(csv.path).values;
      if (csv.truth_path) {
        BinaryGraph truth = WeightedGraph(graph_from_json(read_json_file(*csv.truth_path))).support();
        if (truth.size() != x.cols()) throw Error(ErrorCode::kShapeError, "truth graph size differs from data");
        if (!is_dag(truth)) throw Error(ErrorCode::kNotADag, "truth graph is cyclic");
        result.truth = std::move(truth);
      }
    }

    stage = "prior";
    cfg.prior.validate(static_cast<int>(x.cols()));

    std::optional<IntMatrix> mask;
    if (cfg.neighborhood.enabled) {
      stage = "neighborhood_selection";
      mask = neighborhood_select(x, cfg.neighborhood.lambda);
    }

    stage = "algorithm";
    result.output = learn_impl(x, cfg.algorithm, cfg.prior, mask ? &*mask : nullptr, cfg.threshold, sink, stage);

    if (result.truth) {
      stage = "evaluate";
      result.metrics = evaluate(result.output.graph, *result.truth);
    }
  } catch (const Error &e) {
    Json partial = {{"config", task_config_to_json(cfg)}};
    if (result.truth) partial["truth"] = graph_to_json(result.truth->adjacency());
    throw TaskError(e.code(), stage, strip_code(e), std::move(partial));
  }
  result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

} // namespace causalforge
