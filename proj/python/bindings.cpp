#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "causalforge/gradient.hpp"
#include "causalforge/io.hpp"
#include "causalforge/numeric.hpp"
#include "causalforge/pipeline.hpp"

namespace py = pybind11;
using namespace causalforge;

namespace {

Json parse(const std::string &text) {
  try {
    return text.empty() ? Json() : Json::parse(text);
  } catch (const Json::parse_error &e) {
    throw Error(ErrorCode::kFormatError, e.what());
  }
}

py::dict simulate(int d, int e, long n, const std::string &model, const std::string &sem, const std::string &noise,
                  double noise_scale, double weight_lo, double weight_hi, int rank, std::uint64_t seed) {
  RandomGraphConfig g;
  g.model = parse_graph_model(model);
  g.d = d;
  g.e = e;
  g.rank = rank;
  g.weight_lo = weight_lo;
  g.weight_hi = weight_hi;
  g.seed = seed;
  const auto ds = simulate_iid(random_dag(g), n, parse_mechanism(sem), {parse_noise_family(noise), noise_scale}, seed);
  py::dict out;
  out["X"] = ds.x;
  out["W"] = ds.w.weights();
  out["B"] = IntMatrix(ds.b.adjacency());
  return out;
}

std::string learn_json(const Matrix &x, const std::string &algorithm, const std::string &params,
                       const std::string &prior, std::optional<double> threshold,
                       std::optional<IntMatrix> mask) {
  const AlgorithmConfig algo = params.empty() ? default_algorithm(algorithm) : algorithm_from_json(algorithm, parse(params));
  const PriorKnowledge p = prior.empty() ? PriorKnowledge{} : prior_from_json(parse(prior));
  const LearnOutput r = learn(x, algo, p, mask ? &*mask : nullptr, threshold);
  Json out;
  out["graph"] = graph_to_json(r.graph);
  out["kind"] = r.kind == GraphKind::kDag ? "dag" : "cpdag";
  out["algorithm"] = algorithm_to_json(algo);
  out["converged"] = r.converged;
  if (r.weights) out["weights"] = graph_to_json(r.weights->weights());
  if (r.raw_weights) out["raw_weights"] = graph_to_json(r.raw_weights->weights());
  if (r.causal_order) out["causal_order"] = *r.causal_order;
  out["trace"] = Json::array();
  for (const auto &t : r.trace) out["trace"].push_back(trace_to_json(t));
  return out.dump();
}

std::string evaluate_json(const IntMatrix &est, const IntMatrix &truth) {
  return metrics_to_json(evaluate(est, BinaryGraph{truth})).dump();
}

std::string run_task_json(const std::string &config, bool include_timing) {
  return task_result_to_json(run_task(task_config_from_json(parse(config))), include_timing).dump();
}

std::string normalize_config(const std::string &config) {
  return task_config_to_json(task_config_from_json(parse(config))).dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "causalforge native core";

  // Messages read "Code: detail"; the Python layer splits off the code.
  py::register_exception<Error>(m, "Error");

  m.def("simulate", &simulate, py::arg("d"), py::arg("e"), py::arg("n"), py::arg("model") = "er",
        py::arg("sem") = "linear", py::arg("noise") = "gauss", py::arg("noise_scale") = 1.0,
        py::arg("weight_lo") = 0.5, py::arg("weight_hi") = 2.0, py::arg("rank") = 1, py::arg("seed") = 0);
  m.def("learn_json", &learn_json, py::arg("x"), py::arg("algorithm"), py::arg("params") = "",
        py::arg("prior") = "", py::arg("threshold") = std::nullopt, py::arg("mask") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_json", &evaluate_json, py::arg("estimate"), py::arg("truth"));
  m.def("run_task_json", &run_task_json, py::arg("config"), py::arg("include_timing") = false,
        py::call_guard<py::gil_scoped_release>());
  m.def("normalize_config", &normalize_config, py::arg("config"));
  m.def(
      "acyclicity",
      [](const Matrix &w) {
        const auto r = acyclicity_h(w);
        return py::make_tuple(r.value, r.gradient);
      },
      py::arg("w"));
  m.def(
      "dag_to_cpdag", [](const IntMatrix &b) { return IntMatrix(dag_to_cpdag(BinaryGraph{b}).adjacency()); },
      py::arg("b"));
  m.def("is_dag", [](const Matrix &w) { return is_dag(w); }, py::arg("w"));
}
