#include "causalforge/cli.hpp"

#include <charconv>
#include <csignal>
#include <fstream>

#include <CLI11.hpp>

#include "causalforge/io.hpp"
#include "causalforge/pipeline.hpp"
#include "causalforge/service.hpp"

namespace causalforge {

namespace {

// Inline JSON when the argument starts with '{' or '[', otherwise a file path.
Json json_argument(const std::string &arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return Json::parse(arg);
    } catch (const Json::parse_error &e) {
      throw Error(ErrorCode::kFormatError, std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

void emit(const Json &value, const std::string &path, std::ostream &out) {
  if (path.empty()) {
    out << value.dump(2) << "\n";
  } else {
    write_json_file(path, value);
  }
}

struct SimulateArgs {
  std::string model = "er";
  int d = 0;
  int e = 0;
  int rank = 1;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  long n = 0;
  std::string sem = "linear";
  std::string noise = "gauss";
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct LearnArgs {
  std::string data;
  std::string algo = "notears";
  std::string config;
  std::string prior;
  std::string mask;
  std::optional<double> threshold;
  std::string out;
};

struct EvalArgs {
  std::string est;
  std::string truth;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::string out;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 0;
  std::string static_dir;
  std::string data_dir;
};

int do_simulate(const SimulateArgs &a, std::ostream &out) {
  RandomGraphConfig g;
  g.model = parse_graph_model(a.model);
  g.d = a.d;
  g.e = a.e;
  g.rank = a.rank;
  g.weight_lo = a.weight_lo;
  g.weight_hi = a.weight_hi;
  g.seed = a.seed;
  const NoiseSpec noise{parse_noise_family(a.noise), a.noise_scale};
  Dataset data = simulate_iid(random_dag(g), a.n, parse_mechanism(a.sem), noise, a.seed);
  data.graph_config = g;
  save_dataset(data, a.out);
  out << "wrote " << data.x.rows() << "x" << data.x.cols() << " dataset to " << a.out << "\n";
  return 0;
}

int do_learn(const LearnArgs &a, std::ostream &out) {
  const CsvDataset data = load_csv(a.data);
  const AlgorithmConfig algo =
      a.config.empty() ? default_algorithm(a.algo) : algorithm_from_json(a.algo, json_argument(a.config));
  const PriorKnowledge prior = a.prior.empty() ? PriorKnowledge{} : prior_from_json(json_argument(a.prior));

  std::optional<IntMatrix> mask;
  if (!a.mask.empty()) {
    double lambda = 0.0;
    const auto [ptr, ec] = std::from_chars(a.mask.data(), a.mask.data() + a.mask.size(), lambda);
    if (ec == std::errc() && ptr == a.mask.data() + a.mask.size()) {
      mask = neighborhood_select(data.values, lambda);
    } else {
      mask = (graph_from_json(read_json_file(a.mask)).array() != 0.0).cast<int>().matrix();
    }
  }

  const LearnOutput result = learn(data.values, algo, prior, mask ? &*mask : nullptr, a.threshold);
  Json graph = result.weights ? graph_to_json(result.weights->weights()) : graph_to_json(result.graph);
  graph["kind"] = result.kind == GraphKind::kDag ? "dag" : "cpdag";
  graph["algorithm"] = algorithm_to_json(algo);
  graph["converged"] = result.converged;
  emit(graph, a.out, out);
  return 0;
}

int do_eval(const EvalArgs &a, std::ostream &out) {
  const Matrix est = graph_from_json(read_json_file(a.est));
  const Matrix truth = graph_from_json(read_json_file(a.truth));
  const IntMatrix est_adj = (est.array() != 0.0).cast<int>().matrix();
  const BinaryGraph truth_graph((truth.array() != 0.0).cast<int>().matrix());
  emit(metrics_to_json(evaluate(est_adj, truth_graph)), a.out, out);
  return 0;
}

int do_run(const RunArgs &a, std::ostream &out, std::ostream &err) {
  const TaskConfig cfg = task_config_from_json(json_argument(a.config));
  try {
    emit(task_result_to_json(run_task(cfg)), a.out, out);
  } catch (const TaskError &e) {
    err << Json{{"error", {{"code", e.code_name()}, {"stage", e.stage()}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }
  return 0;
}

HttpServer *g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

int do_serve(const ServeArgs &a, std::ostream &out, std::ostream &err) {
  TaskService::Options options;
  options.workers = a.workers;
  if (!a.data_dir.empty()) options.data_dir = a.data_dir;
  TaskService service(options);
  std::optional<std::filesystem::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  HttpServer server(service, static_dir);
  const int port = server.bind(a.host, a.port);
  if (port < 0) {
    err << "cannot bind " << a.host << ":" << a.port << "\n";
    return 2;
  }
  out << "listening on http://" << a.host << ":" << port << " with " << service.workers() << " workers"
      << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Causal structure learning toolkit", "causalforge"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Simulate a random DAG and data from it");
  simulate->add_option("--model", sim.model, "Graph model: er, sf or lr")->capture_default_str();
  simulate->add_option("--d", sim.d, "Number of nodes")->required();
  simulate->add_option("--e", sim.e, "Number of edges")->required();
  simulate->add_option("--rank", sim.rank, "Rank for the low-rank model")->capture_default_str();
  simulate->add_option("--weight-lo", sim.weight_lo, "Smallest |weight|")->capture_default_str();
  simulate->add_option("--weight-hi", sim.weight_hi, "Largest |weight|")->capture_default_str();
  simulate->add_option("--n", sim.n, "Number of samples")->required();
  simulate->add_option("--sem", sim.sem, "Mechanism: linear, mlp or quadratic")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Noise: gauss, exp, uniform or gumbel")->capture_default_str();
  simulate->add_option("--noise-scale", sim.noise_scale, "Noise scale")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed for graph and data")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  LearnArgs lrn;
  auto *learn_cmd = app.add_subcommand("learn", "Learn a graph from a CSV data file");
  learn_cmd->add_option("--data", lrn.data, "CSV file with a header row")->required();
  learn_cmd->add_option("--algo", lrn.algo, "pc, ges, direct_lingam, notears or golem")->capture_default_str();
  learn_cmd->add_option("--config", lrn.config, "Algorithm parameters (JSON text or file)");
  learn_cmd->add_option("--prior", lrn.prior, "Prior knowledge (JSON text or file)");
  learn_cmd->add_option("--mask", lrn.mask, "Lasso penalty for neighborhood selection, or a graph JSON mask");
  learn_cmd->add_option("--threshold", lrn.threshold, "Weight threshold override");
  learn_cmd->add_option("--out", lrn.out, "Output graph JSON (stdout if omitted)");

  EvalArgs ev;
  auto *eval_cmd = app.add_subcommand("eval", "Compare an estimated graph with the true graph");
  eval_cmd->add_option("--est", ev.est, "Estimated graph JSON")->required();
  eval_cmd->add_option("--truth", ev.truth, "True graph JSON")->required();
  eval_cmd->add_option("--out", ev.out, "Output metrics JSON (stdout if omitted)");

  RunArgs run;
  auto *run_cmd = app.add_subcommand("run", "Run a task config end to end");
  run_cmd->add_option("--config", run.config, "Task config (JSON text or file)")->required();
  run_cmd->add_option("--out", run.out, "Output task result JSON (stdout if omitted)");

  ServeArgs srv;
  auto *serve_cmd = app.add_subcommand("serve", "Start the HTTP task service");
  serve_cmd->add_option("--host", srv.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", srv.port, "Listen port (0 picks a free port)")->capture_default_str();
  serve_cmd->add_option("--workers", srv.workers, "Worker threads (0 = hardware threads)")->capture_default_str();
  serve_cmd->add_option("--static", srv.static_dir, "Directory of static web assets served under /");
  serve_cmd->add_option("--data-dir", srv.data_dir, "Task persistence directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*simulate) return do_simulate(sim, out);
    if (*learn_cmd) return do_learn(lrn, out);
    if (*eval_cmd) return do_eval(ev, out);
    if (*run_cmd) return do_run(run, out, err);
    if (*serve_cmd) return do_serve(srv, out, err);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

} // namespace causalforge
