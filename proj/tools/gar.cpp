// gar: batch front end for the GAR latent-graph estimator.
// Subcommands: simulate, fit, gof, eval. Every run writes a JSON-shaped
// report with a full config echo; feeding the echoed config back reproduces
// the report byte for byte. Wall-clock timings go to a separate timings.txt
// so reports stay deterministic.

#include <CLI11.hpp>
#include <json.hpp>

#include "gar/estimator.hpp"
#include "gar/io.hpp"
#include "gar/rng.hpp"
#include "gar/simulate.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gar;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240715;  // fixed, never time-based

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

ordered_json config_json(const RunConfig& config) {
  ordered_json out;
  for (const auto& [key, value] : config.items()) out[key] = value;
  return out;
}

class Stopwatch {
 public:
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    const double sec =
        std::chrono::duration<double>(now - last_).count();
    laps_ += name + ": " + format_double(sec) + " s\n";
    last_ = now;
  }
  void write(const std::string& out_dir) const {
    write_text_file(out_dir + "/timings.txt", laps_);
  }

 private:
  std::chrono::steady_clock::time_point last_ =
      std::chrono::steady_clock::now();
  std::string laps_;
};

void finish_report(const std::string& out_dir, const RunConfig& config,
                   ordered_json report) {
  fs::create_directories(out_dir);
  report["config"] = config_json(config);
  write_text_file(out_dir + "/report.json", report.dump(2) + "\n");
  write_text_file(out_dir + "/config_echo.txt", config.serialize());
}

double parse_or_auto(const RunConfig& config, const std::string& key) {
  const std::string& raw = config.get(key);
  return raw == "auto" ? -1.0 : config.get_double(key);
}

Matrix load_data(const RunConfig& config, bool* standardized) {
  const std::string path = config.get("data");
  if (path.empty())
    throw Error(ErrorCode::InvalidArgument, "missing required key: data");
  CsvData csv = read_csv_file(path);
  if (csv.values.rows() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least 2 data rows");
  *standardized = config.get_bool("standardize");
  if (*standardized) return standardize_columns(csv.values);
  return csv.values;
}

FitOptions fit_options_from_config(const RunConfig& config) {
  FitOptions options;
  options.step1.eps_abs = config.get_double("eps_abs");
  options.step1.eps_rel = config.get_double("eps_rel");
  options.step1.max_iter = config.get_int("max_iter");
  options.step23 = options.step1;
  options.step23.rho = config.get_double("rho_refit");
  options.inner.delta_abs = config.get_double("inner_delta_abs");
  options.inner.delta_rel = config.get_double("inner_delta_rel");
  options.inner.max_inner_iter = config.get_int("inner_max_iter");
  options.inner.eps_floor = config.get_double("eps_floor");
  options.literal_phi_init = config.get_bool("literal_phi_init");
  const double gamma = parse_or_auto(config, "gamma");
  if (gamma >= 0.0) options.gamma = gamma;
  options.threads = config.get_int("threads");
  return options;
}

TuningGrid grid_from_config(const RunConfig& config, int p, int n) {
  TuningGrid grid = TuningGrid::defaults(p, n);
  const double lambda = parse_or_auto(config, "lambda");
  if (lambda > 0.0) grid.lambda_values = {lambda};
  const double eps = parse_or_auto(config, "eps_thre");
  if (eps > 0.0) grid.eps_thre_values = {eps};
  return grid;
}

// ---------------------------------------------------------------- simulate

RunConfig simulate_defaults() {
  return RunConfig({{"p", "100"},
                    {"n", "500"},
                    {"seed", std::to_string(kDefaultSeed)},
                    {"edge_prob", "auto"},  // auto = 2/p
                    {"self_loop_prob", "0"},
                    {"weight_min", "0.5"},
                    {"weight_max", "1"},
                    {"theta0", "1"},
                    {"theta1", "2"},
                    {"model", "gar"}});
}

int cmd_simulate(const RunConfig& config, const std::string& out_dir) {
  SimDesign design;
  design.p = config.get_int("p");
  design.n = config.get_int("n");
  design.seed = config.get_u64("seed");
  const double edge_prob = parse_or_auto(config, "edge_prob");
  design.edge_prob = edge_prob < 0.0 ? -1.0 : edge_prob;
  design.self_loop_prob = config.get_double("self_loop_prob");
  design.weight_min = config.get_double("weight_min");
  design.weight_max = config.get_double("weight_max");
  design.theta0 = config.get_double("theta0");
  design.theta1 = config.get_double("theta1");
  design.validate();

  const std::string model = config.get("model");
  fs::create_directories(out_dir);

  ordered_json report;
  report["tool"] = "gar simulate";
  report["version"] = version();
  report["rng"] = kRngId;

  std::vector<std::string> header;
  header.reserve(design.p);
  for (int j = 0; j < design.p; ++j) header.push_back("v" + std::to_string(j));

  if (model == "gar") {
    const Adjacency graph = generate_graph(design);
    const Truth truth = truth_from_adjacency(design, graph);
    NormalizedLaplacianEstimate ln;
    ln.entries = truth.l / design.theta1;
    const Matrix data = sample_gar(design, ln);

    std::ofstream data_file(out_dir + "/data.csv");
    write_csv(data_file, data, header);

    std::ofstream edge_file(out_dir + "/truth_edges.tsv");
    write_edge_list(edge_file, truth.l);

    ModelFile truth_model;
    truth_model.theta0 = truth.theta0;
    truth_model.theta1 = design.theta1;
    truth_model.v0 = truth.v0;
    truth_model.l_diag = truth.l.diagonal();
    write_model_json(out_dir + "/truth_model.json", truth_model);

    report["graph"] = {{"edges", truth.topology.edge_count()},
                       {"self_loops", (graph.weights.diagonal().array() > 0.0).count()}};
    report["outputs"] = {"data.csv", "truth_edges.tsv", "truth_model.json"};
  } else if (model == "nongar") {
    const Matrix omega = nongar_precision(design);
    const Matrix data = sample_gaussian_precision(omega, design.n, design.seed);
    std::ofstream data_file(out_dir + "/data.csv");
    write_csv(data_file, data, header);
    report["control"] =
        "sparse positive-offdiagonal precision (not a GAR model)";
    report["outputs"] = {"data.csv"};
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "model must be 'gar' or 'nongar', got '" + model + "'");
  }

  finish_report(out_dir, config, std::move(report));
  return 0;
}

// --------------------------------------------------------------------- fit

RunConfig fit_defaults() {
  return RunConfig({{"data", ""},
                    {"standardize", "0"},
                    {"lambda", "auto"},
                    {"eps_thre", "auto"},
                    {"gamma", "auto"},
                    {"seed", std::to_string(kDefaultSeed)},
                    {"threads", std::to_string(default_threads())},
                    {"eps_abs", "1e-4"},
                    {"eps_rel", "1e-3"},
                    {"max_iter", "5000"},
                    {"rho_refit", "1"},
                    {"inner_delta_abs", "1e-5"},
                    {"inner_delta_rel", "1e-3"},
                    {"inner_max_iter", "1000"},
                    {"eps_floor", "1e-6"},
                    {"literal_phi_init", "0"}});
}

int cmd_fit(const RunConfig& config, const std::string& out_dir) {
  Stopwatch watch;
  bool standardized = false;
  const Matrix data = load_data(config, &standardized);
  const int n = int(data.rows());
  const int p = int(data.cols());
  watch.lap("load");

  const TuningGrid grid = grid_from_config(config, p, n);
  const FitOptions options = fit_options_from_config(config);
  const FitReport fit = fit_full(data, grid, options);
  watch.lap("fit");

  fs::create_directories(out_dir);
  std::ofstream edge_file(out_dir + "/edges.tsv");
  write_edge_list(edge_file, fit.model.laplacian.entries);

  ModelFile model_file;
  model_file.theta0 = fit.model.theta0;
  model_file.v0 = fit.model.v0;
  model_file.l_diag = fit.model.laplacian.entries.diagonal();
  write_model_json(out_dir + "/model.json", model_file);

  ordered_json report;
  report["tool"] = "gar fit";
  report["version"] = version();
  report["data"] = {{"n", n}, {"p", p}, {"standardized", standardized}};

  ordered_json result;
  result["theta0_init"] = fit.theta0_init;
  result["lambda_star"] = fit.lambda_star;
  result["eps_thre_star"] = fit.eps_star;
  result["theta0"] = fit.model.theta0;
  result["loglik"] = fit.loglik;
  result["param_count"] = fit.param_count;
  ordered_json table = ordered_json::array();
  for (const GridCell& cell : fit.table) {
    ordered_json row;
    row["lambda"] = cell.lambda;
    row["eps_thre"] = cell.eps_thre;
    row["ebic"] = cell.ebic.score;
    row["loglik_term"] = cell.ebic.loglik_term;
    row["complexity_term"] = cell.ebic.complexity_term;
    row["gamma"] = cell.ebic.gamma;
    row["s_hat"] = cell.s_hat;
    row["converged"] = cell.converged;
    row["selected"] = cell.selected;
    row["iterations"] = {{"step1", cell.step1_iterations},
                         {"step2", cell.step2_iterations},
                         {"step3", cell.step3_iterations},
                         {"eigvec", cell.eigvec_iterations}};
    row["inner_converged"] = cell.inner_converged;
    if (cell.selected) {
      result["s_hat"] = cell.s_hat;
      result["ebic"] = cell.ebic.score;
      result["converged"] = cell.converged;
    }
    table.push_back(std::move(row));
  }
  report["result"] = std::move(result);
  report["ebic_table"] = std::move(table);
  report["outputs"] = {"edges.tsv", "model.json"};
  finish_report(out_dir, config, std::move(report));
  watch.lap("write");
  watch.write(out_dir);
  return 0;
}

// --------------------------------------------------------------------- gof

RunConfig gof_defaults() {
  return RunConfig({{"data", ""},
                    {"standardize", "0"},
                    {"lambda", "auto"},
                    {"bootstrap_b", "100"},
                    {"seed", std::to_string(kDefaultSeed)},
                    {"threads", std::to_string(default_threads())},
                    {"eps_abs", "1e-4"},
                    {"eps_rel", "1e-3"},
                    {"max_iter", "5000"}});
}

int cmd_gof(const RunConfig& config, const std::string& out_dir) {
  Stopwatch watch;
  bool standardized = false;
  const Matrix data = load_data(config, &standardized);
  const int n = int(data.rows());
  const int p = int(data.cols());
  watch.lap("load");

  AdmmSettings settings;
  settings.eps_abs = config.get_double("eps_abs");
  settings.eps_rel = config.get_double("eps_rel");
  settings.max_iter = config.get_int("max_iter");
  const GfResult gf = goodness_of_fit(
      data, parse_or_auto(config, "lambda"), config.get_int("bootstrap_b"),
      config.get_u64("seed"), settings, config.get_int("threads"));
  watch.lap("bootstrap");

  ordered_json report;
  report["tool"] = "gar gof";
  report["version"] = version();
  report["rng"] = kRngId;
  report["data"] = {{"n", n}, {"p", p}, {"standardized", standardized}};
  report["result"] = {{"gf", gf.gf},
                      {"b", gf.b},
                      {"failed_draws", gf.failed_draws},
                      {"ell_obs", gf.ell_obs}};
  if (p > n) {
    report["warning"] =
        "p > n: the parametric-bootstrap GF measure is known to fail in this "
        "regime";
    std::cerr << "warning: p > n; the GF measure is unreliable here\n";
  }
  report["ell_boot"] = gf.ell_boot;
  finish_report(out_dir, config, std::move(report));
  watch.lap("write");
  watch.write(out_dir);
  return 0;
}

// -------------------------------------------------------------------- eval

RunConfig eval_defaults() {
  return RunConfig({{"fit_dir", ""}, {"truth_dir", ""}});
}

int cmd_eval(const RunConfig& config, const std::string& out_dir) {
  const std::string fit_dir = config.get("fit_dir");
  const std::string truth_dir = config.get("truth_dir");
  if (fit_dir.empty() || truth_dir.empty())
    throw Error(ErrorCode::InvalidArgument,
                "eval requires fit_dir and truth_dir");

  const LoadedModel fitted = read_model_bundle(fit_dir, "");
  const LoadedModel truth_bundle = read_model_bundle(truth_dir, "truth_");

  Truth truth;
  truth.theta0 = truth_bundle.model.theta0;
  truth.v0 = truth_bundle.model.v0;
  truth.l = truth_bundle.model.laplacian.entries;
  truth.topology = *truth_bundle.model.laplacian.support;

  const MetricsRow metrics = evaluate(fitted.model, truth);

  ordered_json report;
  report["tool"] = "gar eval";
  report["version"] = version();
  report["metrics"] = {{"power", metrics.power},
                       {"fdr", metrics.fdr},
                       {"f1", metrics.f1},
                       {"theta0_err", metrics.theta0_err},
                       {"v0_err", metrics.v0_err},
                       {"l_err", metrics.l_err}};
  finish_report(out_dir, config, std::move(report));
  return 0;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::pair<std::string, std::string>> overrides;
};

void attach_override_flag(CLI::App* cmd, CommonFlags& flags,
                          const std::string& flag, const std::string& key,
                          const std::string& help) {
  cmd->add_option_function<std::string>(
      flag,
      [&flags, key](const std::string& value) {
        flags.overrides.emplace_back(key, value);
      },
      help);
}

int run_command(const CommonFlags& flags, RunConfig config,
                int (*command)(const RunConfig&, const std::string&)) {
  if (!flags.config_path.empty()) config.load_file(flags.config_path);
  for (const auto& [key, value] : flags.overrides) config.set(key, value);
  return command(config, flags.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAR latent-graph estimation"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CommonFlags sim_flags, fit_flags, gof_flags, eval_flags;

  CLI::App* sim = app.add_subcommand("simulate", "generate benchmark data");
  sim->add_option("--config", sim_flags.config_path, "key=value config file");
  sim->add_option("--out-dir", sim_flags.out_dir, "output directory");
  attach_override_flag(sim, sim_flags, "--p", "p", "dimension");
  attach_override_flag(sim, sim_flags, "--n", "n", "sample size");
  attach_override_flag(sim, sim_flags, "--seed", "seed", "master RNG seed");
  attach_override_flag(sim, sim_flags, "--edge-prob", "edge_prob",
                       "edge probability (auto = 2/p)");
  attach_override_flag(sim, sim_flags, "--self-loop-prob", "self_loop_prob",
                       "self-loop probability");
  attach_override_flag(sim, sim_flags, "--theta0", "theta0", "theta0");
  attach_override_flag(sim, sim_flags, "--theta1", "theta1", "theta1");
  attach_override_flag(sim, sim_flags, "--model", "model", "gar | nongar");

  CLI::App* fit = app.add_subcommand("fit", "fit the GAR model");
  fit->add_option("--config", fit_flags.config_path, "key=value config file");
  fit->add_option("--out-dir", fit_flags.out_dir, "output directory");
  attach_override_flag(fit, fit_flags, "--data", "data", "input CSV");
  attach_override_flag(fit, fit_flags, "--seed", "seed", "seed (echoed; fit is deterministic)");
  attach_override_flag(fit, fit_flags, "--threads", "threads", "worker cap");
  attach_override_flag(fit, fit_flags, "--lambda", "lambda",
                       "single lambda override (skips the grid)");
  attach_override_flag(fit, fit_flags, "--eps-thre", "eps_thre",
                       "single threshold override (skips the grid)");
  attach_override_flag(fit, fit_flags, "--gamma", "gamma", "eBIC gamma or auto");
  fit->add_flag_function(
      "--standardize",
      [&fit_flags](std::int64_t) {
        fit_flags.overrides.emplace_back("standardize", "1");
      },
      "per-column (x - mean) / sd before fitting");

  CLI::App* gof = app.add_subcommand("gof", "parametric-bootstrap goodness of fit");
  gof->add_option("--config", gof_flags.config_path, "key=value config file");
  gof->add_option("--out-dir", gof_flags.out_dir, "output directory");
  attach_override_flag(gof, gof_flags, "--data", "data", "input CSV");
  attach_override_flag(gof, gof_flags, "--seed", "seed", "master RNG seed");
  attach_override_flag(gof, gof_flags, "--threads", "threads", "worker cap");
  attach_override_flag(gof, gof_flags, "--lambda", "lambda",
                       "Step 1 lambda (auto = sqrt(log p / n))");
  attach_override_flag(gof, gof_flags, "--bootstrap-b", "bootstrap_b",
                       "bootstrap draw count");
  gof->add_flag_function(
      "--standardize",
      [&gof_flags](std::int64_t) {
        gof_flags.overrides.emplace_back("standardize", "1");
      },
      "per-column (x - mean) / sd before fitting");

  CLI::App* eval = app.add_subcommand("eval", "score a fit against a truth bundle");
  eval->add_option("--config", eval_flags.config_path, "key=value config file");
  eval->add_option("--out-dir", eval_flags.out_dir, "output directory");
  attach_override_flag(eval, eval_flags, "--fit-dir", "fit_dir",
                       "directory with model.json + edges.tsv");
  attach_override_flag(eval, eval_flags, "--truth-dir", "truth_dir",
                       "directory with truth_model.json + truth_edges.tsv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_command(sim_flags, simulate_defaults(), cmd_simulate);
    if (fit->parsed()) return run_command(fit_flags, fit_defaults(), cmd_fit);
    if (gof->parsed()) return run_command(gof_flags, gof_defaults(), cmd_gof);
    if (eval->parsed())
      return run_command(eval_flags, eval_defaults(), cmd_eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
