#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedsim/data_io.hpp"
#include "fedsim/experiments.hpp"
#include "fedsim/orchestrator.hpp"

namespace {

using namespace fedsim;

struct CommonOptions {
  std::string method = "fedavg";
  std::string dataset = "synthetic-iid";
  std::string data_path;  // required for --dataset w8a
  int clients = 50;
  int active = 5;
  int rounds = 10;
  std::uint64_t seed = 0;
  int local_steps = 1;
  double step_size = 1.0;
  double sgd_step_size = 0.1;
  int cg_max_iter = 250;
  double cg_tol = 1e-6;
  std::string cg_init = "zero";
  std::vector<double> mu_set = {1.0, 0.5, 0.25, 0.1, 0.05, 0.01};
  double gamma = 1e-3;  // 1/n with n = 1000
  double fraction = 0.1;
  int dim = 10;
  int n_per_client = 20;
  bool resample_linesearch = false;
  std::string out = "trace.csv";
};

void add_common_options(CLI::App& app, CommonOptions& o) {
  app.add_option("--method", o.method,
                 "giant | giant-local-global-ls | giant-local-local-ls | "
                 "localnewton-global-ls | localnewton | fedavg");
  app.add_option("--dataset", o.dataset, "w8a | synthetic-iid | synthetic-het");
  app.add_option("--data-path", o.data_path, "LibSVM file for --dataset w8a");
  app.add_option("--clients", o.clients);
  app.add_option("--active", o.active, "active clients per round");
  app.add_option("--rounds", o.rounds);
  app.add_option("--seed", o.seed);
  app.add_option("--local-steps", o.local_steps);
  app.add_option("--step-size", o.step_size, "local step size gamma");
  app.add_option("--sgd-step-size", o.sgd_step_size, "FedAvg step size eta");
  app.add_option("--cg-max-iter", o.cg_max_iter);
  app.add_option("--cg-tol", o.cg_tol);
  app.add_option("--cg-init", o.cg_init, "zero | random");
  app.add_option("--mu-set", o.mu_set,
                 "line-search candidates, strictly decreasing")
      ->delimiter(',');
  app.add_option("--gamma", o.gamma, "l2 coefficient");
  app.add_option("--fraction", o.fraction, "subsample fraction for w8a");
  app.add_option("--dim", o.dim, "synthetic dimension");
  app.add_option("--n-per-client", o.n_per_client, "synthetic rows per client");
  app.add_flag("--resample-linesearch", o.resample_linesearch,
               "poll a freshly sampled client set in the backtracking search");
  app.add_option("--out", o.out, "output CSV path");
  app.set_config("--config", "", "flat key=value config file; CLI overrides");
  app.allow_config_extras(false);
}

FederatedDataset load_dataset(const CommonOptions& o) {
  if (o.dataset == "w8a") {
    if (o.data_path.empty()) {
      throw CLI::ValidationError("--data-path",
                                 "a local LibSVM file is required for w8a");
    }
    auto [features, labels] = parse_libsvm_file(o.data_path);
    return partition(features, labels, o.clients, o.fraction, o.seed);
  }
  SyntheticSpec spec;
  spec.d = o.dim;
  spec.n_per_client = o.n_per_client;
  spec.clients = o.clients;
  spec.seed = o.seed;
  if (o.dataset == "synthetic-iid") {
    spec.heterogeneous = false;
  } else if (o.dataset == "synthetic-het") {
    spec.heterogeneous = true;
  } else {
    throw CLI::ValidationError("--dataset", "unknown dataset " + o.dataset);
  }
  return synth_generate(spec);
}

ExperimentConfig build_config(const CommonOptions& o) {
  ExperimentConfig cfg;
  cfg.method.method = method_from_name(o.method);
  cfg.method.local.local_steps = o.local_steps;
  cfg.method.local.local_step_size = o.step_size;
  cfg.method.local.sgd_step_size = o.sgd_step_size;
  cfg.method.cg.max_iterations = o.cg_max_iter;
  cfg.method.cg.relative_tolerance = o.cg_tol;
  if (o.cg_init == "random") {
    cfg.method.cg.init = CgConfig::Init::kRandomUniform;
    cfg.method.cg.seed = o.seed;
  } else if (o.cg_init != "zero") {
    throw CLI::ValidationError("--cg-init", "must be zero or random");
  }
  cfg.method.ls.candidates = o.mu_set;
  cfg.method.resample_for_linesearch = o.resample_linesearch;
  cfg.rounds = o.rounds;
  cfg.active_clients = o.active;
  cfg.seed = o.seed;
  return cfg;
}

std::vector<RegularizedObjective> make_objectives(const FederatedDataset& ds,
                                                  double gamma) {
  std::vector<RegularizedObjective> objs;
  objs.reserve(ds.clients.size());
  for (const auto& c : ds.clients) objs.emplace_back(c, gamma);
  return objs;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
}

int cmd_run(const CommonOptions& o) {
  const FederatedDataset ds = load_dataset(o);
  const auto objectives = make_objectives(ds, o.gamma);
  const Trace trace = run_experiment(build_config(o), objectives);
  std::ostringstream csv;
  export_trace(trace, csv);
  write_file(o.out, csv.str());
  std::cout << "wrote " << o.out << " (final loss "
            << trace.final_loss() << ")\n";
  return 0;
}

int cmd_grid(const CommonOptions& o, const std::string& out_dir, int workers,
             std::vector<double> grid_steps, std::vector<int> grid_locals) {
  const FederatedDataset ds = load_dataset(o);
  const auto objectives = make_objectives(ds, o.gamma);
  const ExperimentConfig base = build_config(o);

  std::vector<GridCell> grid;
  if (grid_steps.empty() || grid_locals.empty()) {
    grid = base.method.method == Method::kFedAvg ? fedavg_grid()
                                                 : second_order_grid();
  } else {
    for (double s : grid_steps) {
      for (int l : grid_locals) grid.push_back({s, l});
    }
  }

  const GridResult result = run_grid(base, objectives, grid, workers);

  std::filesystem::create_directories(out_dir);
  for (size_t i = 0; i < result.cells.size(); ++i) {
    std::ostringstream csv;
    export_trace(result.cells[i].trace, csv);
    write_file(out_dir + "/cell_" + std::to_string(i) + "_" +
                   trace_filename(o.method, o.dataset, o.seed),
               csv.str());
  }
  std::ostringstream summary;
  export_grid_summary(result, summary);
  write_file(out_dir + "/summary.csv", summary.str());

  if (result.best_index < 0) {
    std::cerr << "grid: every cell diverged\n";
    return 1;
  }
  const auto& best = result.cells[result.best_index];
  std::cout << "best cell " << result.best_index << ": step_size="
            << best.cell.step_size << " local_steps=" << best.cell.local_steps
            << " final_loss=" << best.final_loss << "\n";
  return 0;
}

int cmd_hessian_similarity(const CommonOptions& o, const std::string& norm_name,
                           double eval_scale) {
  const FederatedDataset ds = load_dataset(o);
  const auto objectives = make_objectives(ds, o.gamma);

  MatrixNorm norm;
  if (norm_name == "frobenius") {
    norm = MatrixNorm::kFrobenius;
  } else if (norm_name == "spectral") {
    norm = MatrixNorm::kSpectral;
  } else {
    throw CLI::ValidationError("--norm", "must be frobenius or spectral");
  }

  const Vector w = eval_scale * Vector::Ones(ds.dim);
  const auto result = hessian_similarity(objectives, w, norm);

  std::ostringstream csv;
  csv.precision(17);
  csv << "k,error\n";
  for (size_t k = 0; k < result.error_by_k.size(); ++k) {
    csv << (k + 1) << ',' << result.error_by_k[k] << '\n';
  }
  csv << "identity," << result.identity_baseline << '\n';
  write_file(o.out, csv.str());
  std::cout << "wrote " << o.out << " (identity baseline "
            << result.identity_baseline << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated second-order optimization simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "single experiment, trace CSV");
  add_common_options(*run, run_opts);

  CommonOptions grid_opts;
  std::string grid_out_dir = "grid_out";
  int grid_workers = 1;
  std::vector<double> grid_steps;
  std::vector<int> grid_locals;
  CLI::App* grid = app.add_subcommand("grid", "hyperparameter sweep");
  add_common_options(*grid, grid_opts);
  grid->add_option("--out-dir", grid_out_dir, "directory for per-cell traces");
  grid->add_option("--workers", grid_workers, "concurrent grid cells");
  grid->add_option("--grid-step-sizes", grid_steps, "override step-size axis")
      ->delimiter(',');
  grid->add_option("--grid-local-steps", grid_locals,
                   "override local-step axis")
      ->delimiter(',');

  CommonOptions hs_opts;
  std::string hs_norm = "frobenius";
  double hs_eval_scale = 0.0;
  CLI::App* hs = app.add_subcommand(
      "hessian-similarity",
      "error of k-client Hessian averages against the global Hessian");
  add_common_options(*hs, hs_opts);
  hs->add_option("--norm", hs_norm, "frobenius | spectral");
  hs->add_option("--eval-scale", hs_eval_scale,
                 "evaluation point w = scale * ones (default 0)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_opts);
    if (grid->parsed()) {
      return cmd_grid(grid_opts, grid_out_dir, grid_workers, grid_steps,
                      grid_locals);
    }
    if (hs->parsed()) return cmd_hessian_similarity(hs_opts, hs_norm,
                                                    hs_eval_scale);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
