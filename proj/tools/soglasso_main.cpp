#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sog/experiments.hpp"
#include "sog/groups.hpp"
#include "sog/io.hpp"
#include "sog/meanwidth.hpp"
#include "sog/penalty.hpp"
#include "sog/simulate.hpp"
#include "sog/solver.hpp"

namespace {

using namespace sog;

struct GlobalOpts {
  uint64_t seed = 0;
  int jobs = 1;
  bool reproducible = false;
  std::string out;
};

ObservationModel make_model(const std::string& name, double beta,
                            double sigma) {
  if (name == "sign") return ObservationModel::sign();
  if (name == "logistic") return ObservationModel::logistic(beta);
  if (name == "linear") return ObservationModel::linear(sigma);
  throw std::invalid_argument("unknown model '" + name +
                              "' (expected sign, logistic or linear)");
}

SolverConfig config_from_file(Config& cfg) {
  SolverConfig sc;
  sc.eta1 = cfg.get_double("solver.eta1", 1.0);
  sc.eta2 = cfg.get_double("solver.eta2", 0.0);
  sc.max_iters = cfg.get_int("solver.max_iters", 5000);
  sc.rel_tol = cfg.get_double("solver.rel_tol", 1e-9);
  sc.acceleration = cfg.get_bool("solver.acceleration", true);
  sc.debias = cfg.get_bool("solver.debias", false);
  double fixed = cfg.get_double("solver.step", 0.0);
  if (fixed > 0)
    sc.step_rule = StepRule::fixed(fixed);
  else
    sc.step_rule = StepRule::backtracking(
        cfg.get_double("solver.backtrack_factor", 0.5),
        cfg.get_double("solver.step_initial", 0.0));
  sc.params = PenaltyParams::uniform(cfg.get_double("penalty.lambda1", 0.0),
                                     cfg.get_int("penalty.l_target", 1));
  return sc;
}

void warn_unused(const Config& cfg) {
  for (const auto& key : cfg.unused())
    std::cerr << "warning: unused config key '" << key << "'\n";
}

struct FitArgs {
  std::string design, labels, groups, config;
  bool header = false;
};

int run_fit(const GlobalOpts& g, const FitArgs& a) {
  Eigen::MatrixXd Phi = read_csv_matrix(a.design, a.header);
  Eigen::VectorXd y = read_csv_vector(a.labels, a.header);
  GroupLayout layout =
      build_layout(read_groups_file(a.groups), static_cast<int>(Phi.cols()));

  Config cfg = a.config.empty() ? Config::parse_string("", "<defaults>")
                                : Config::parse_file(a.config);
  std::string loss_name = cfg.get_string("loss", "squared");
  Loss loss;
  if (loss_name == "squared")
    loss = Loss::squared();
  else if (loss_name == "classification")
    loss = Loss::classification();
  else
    throw std::invalid_argument("config: loss must be squared or classification");
  SolverConfig sc = config_from_file(cfg);
  sc.seed = g.seed;
  warn_unused(cfg);

  FitResult fr = fit(Phi, y, layout, loss, sc);

  std::string stem = g.out.empty() ? "model" : g.out;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
    stem = stem.substr(0, stem.size() - 4);
  {
    std::ofstream mout(stem + ".csv");
    if (!mout) throw std::runtime_error("cannot write: " + stem + ".csv");
    for (int i = 0; i < fr.x_hat.size(); ++i)
      mout << CsvWriter::num(fr.x_hat[i]) << "\n";
  }
  {
    std::ofstream rout(stem + "_report.txt");
    if (!rout) throw std::runtime_error("cannot write: " + stem + "_report.txt");
    rout << "converged " << (fr.converged ? 1 : 0) << "\n";
    rout << "iterations " << fr.iterations << "\n";
    rout << "objective " << CsvWriter::num(fr.objective_trace.back()) << "\n";
    rout << "support";
    for (int i : fr.support) rout << " " << i;
    rout << "\n";
    rout << "active_groups";
    for (int gidx : fr.active_groups) rout << " " << gidx;
    rout << "\n";
    if (fr.debias_rank_deficient) rout << "debias_rank_deficient 1\n";
  }
  {
    CsvWriter trace(stem + "_trace.csv", {"iter", "objective"},
                    g.reproducible);
    for (std::size_t i = 0; i < fr.objective_trace.size(); ++i)
      trace.row({CsvWriter::num(int(i)), CsvWriter::num(fr.objective_trace[i])});
  }
  std::cout << (fr.converged ? "converged" : "hit max iterations") << " after "
            << fr.iterations << " iterations, objective "
            << CsvWriter::num(fr.objective_trace.back()) << ", support size "
            << fr.support.size() << "\n";
  return fr.converged ? 0 : 2;
}

int run_cv(const GlobalOpts& g, const FitArgs& a) {
  Eigen::MatrixXd Phi = read_csv_matrix(a.design, a.header);
  Eigen::VectorXd y = read_csv_vector(a.labels, a.header);
  GroupLayout layout =
      build_layout(read_groups_file(a.groups), static_cast<int>(Phi.cols()));

  Config cfg = a.config.empty() ? Config::parse_string("", "<defaults>")
                                : Config::parse_file(a.config);
  std::string loss_name = cfg.get_string("loss", "squared");
  Loss loss = loss_name == "classification" ? Loss::classification()
                                            : Loss::squared();
  if (loss_name != "squared" && loss_name != "classification")
    throw std::invalid_argument("config: loss must be squared or classification");
  SolverConfig base = config_from_file(cfg);
  base.seed = g.seed;
  int folds = cfg.get_int("cv.folds", 4);
  std::vector<double> eta1s = cfg.get_double_list("solver.eta1_grid",
                                                  {base.eta1});
  std::vector<double> lambda1s = cfg.get_double_list(
      "penalty.lambda1_grid", {base.params.lambda1});
  warn_unused(cfg);

  std::vector<SolverConfig> grid;
  for (double l1 : lambda1s)
    for (double e1 : eta1s) {
      SolverConfig c = base;
      c.eta1 = e1;
      c.params = PenaltyParams::uniform(l1, base.params.l_target);
      grid.push_back(c);
    }

  CvResult cv = cross_validate(Phi, y, layout, loss, grid, folds, g.seed);
  if (cv.any_fold_skipped)
    std::cerr << "warning: skipped folds with single-class training labels\n";

  std::string path = g.out.empty() ? "cv.csv" : g.out;
  CsvWriter csv(path, {"index", "eta1", "lambda1", "mean_error", "best"},
                g.reproducible);
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv.row({CsvWriter::num(int(i)), CsvWriter::num(grid[i].eta1),
             CsvWriter::num(grid[i].params.lambda1),
             CsvWriter::num(cv.mean_errors[i]),
             CsvWriter::num(int(i) == cv.best_index ? 1 : 0)});
  std::cout << "best: eta1 " << CsvWriter::num(cv.best.eta1) << ", lambda1 "
            << CsvWriter::num(cv.best.params.lambda1) << ", error "
            << CsvWriter::num(cv.mean_errors[cv.best_index]) << "\n";
  return 0;
}

struct PhaseArgs {
  std::vector<int> n_grid = {50, 100, 200, 400};
  std::string groups_file;
  std::vector<int> blocks = {25, 4};  // K, L when no group file is given
  int k = 3, l = 2;
  std::string model = "sign";
  double beta = 1.0, sigma = 0.1, rho = 0.0;
  int trials = 20;
  std::vector<std::string> methods = {"soglasso"};
  double lambda1 = 1.0, eta2 = 0.5;
  std::vector<double> eta1_frac = {0.2};
  int cv_folds = 0;
  bool no_debias = false;
};

int run_phase_cmd(const GlobalOpts& g, const PhaseArgs& a) {
  PhaseSpec spec;
  spec.n_grid = a.n_grid;
  if (!a.groups_file.empty()) {
    auto raw = read_groups_file(a.groups_file);
    int p = 0;
    for (const auto& grp : raw)
      for (int idx : grp) p = std::max(p, idx + 1);
    spec.layout = build_layout(raw, p);
  } else {
    if (a.blocks.size() != 2)
      throw std::invalid_argument("--blocks expects K,L");
    spec.layout = make_block_layout(a.blocks[0], a.blocks[1]);
  }
  spec.k = a.k;
  spec.l = a.l;
  spec.model = make_model(a.model, a.beta, a.sigma);
  spec.ar1_rho = a.rho;
  spec.trials = a.trials;
  spec.seed = g.seed;
  spec.methods = a.methods;
  spec.lambda1 = a.lambda1;
  spec.eta2 = a.eta2;
  spec.debias = !a.no_debias;
  spec.eta1_fractions = a.eta1_frac;
  spec.cv_folds = a.cv_folds;
  spec.jobs = g.jobs;

  std::vector<PhaseRow> rows = run_phase(spec);

  std::string path = g.out.empty() ? "phase.csv" : g.out;
  CsvWriter csv(path, {"method", "n", "trial", "sq_error", "seconds"},
                g.reproducible);
  for (const auto& row : rows)
    csv.row({row.method, CsvWriter::num(row.n), CsvWriter::num(row.trial),
             CsvWriter::num(row.sq_error),
             CsvWriter::num(g.reproducible ? 0.0 : row.seconds)});
  for (const auto& s : summarize_phase(rows))
    std::cerr << s.method << " n=" << s.n << ": mean sq_error "
              << CsvWriter::num(s.mean) << " +- " << CsvWriter::num(s.std_error)
              << " (" << s.trials << " trials)\n";
  return 0;
}

struct ToyArgs {
  int num_groups = 25, group_size = 6, shift = 4;
  int k = 5, n = 100, trials = 25, tasks = 1;
  std::vector<double> alpha_grid = {0.2, 0.4, 0.6, 0.8, 1.0};
  double sigma = 0.1;
  std::vector<std::string> methods = {"lasso", "glasso", "oglasso",
                                      "soglasso"};
  std::vector<double> eta1_frac = {0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
  std::vector<double> lambda1_grid = {0.5, 1.0, 2.0};
};

int run_toy_cmd(const GlobalOpts& g, const ToyArgs& a) {
  ToySpec spec;
  spec.num_groups = a.num_groups;
  spec.group_size = a.group_size;
  spec.shift = a.shift;
  spec.k = a.k;
  spec.n = a.n;
  spec.trials = a.trials;
  spec.tasks = a.tasks;
  spec.alpha_grid = a.alpha_grid;
  spec.sigma_noise = a.sigma;
  spec.seed = g.seed;
  spec.methods = a.methods;
  spec.eta1_fractions = a.eta1_frac;
  spec.lambda1_grid = a.lambda1_grid;
  spec.jobs = g.jobs;

  GroupLayout chain = make_chain_layout(a.num_groups, a.group_size, a.shift);
  std::cerr << "chain dimension p=" << chain.p << "\n";

  std::vector<ToyRow> rows = run_toy_regression(spec);
  std::string path = g.out.empty() ? "toy.csv" : g.out;
  CsvWriter csv(path, {"method", "alpha", "mean_mse", "std_error", "trials"},
                g.reproducible);
  for (const auto& row : rows)
    csv.row({row.method, CsvWriter::num(row.alpha),
             CsvWriter::num(row.mean_mse), CsvWriter::num(row.std_error),
             CsvWriter::num(row.trials)});
  return 0;
}

int run_width_cmd(const GlobalOpts& g, int trials, int chisq_trials) {
  std::vector<WidthGridRow> rows =
      run_width_grid(trials, chisq_trials, g.seed, g.jobs);
  std::string path = g.out.empty() ? "width.csv" : g.out;
  CsvWriter csv(path,
                {"kind", "K", "L", "k", "l", "d", "trials", "empirical",
                 "std_error", "bound", "pass", "skipped"},
                g.reproducible);
  int violations = 0;
  for (const auto& row : rows) {
    if (!row.pass && !row.skipped) ++violations;
    csv.row({row.kind, CsvWriter::num(row.K), CsvWriter::num(row.L),
             CsvWriter::num(row.k), CsvWriter::num(row.l),
             CsvWriter::num(row.d), CsvWriter::num(row.trials),
             CsvWriter::num(row.empirical), CsvWriter::num(row.std_error),
             CsvWriter::num(row.bound), CsvWriter::num(row.pass ? 1 : 0),
             CsvWriter::num(row.skipped ? 1 : 0)});
  }
  std::cerr << violations << " violations\n";
  return violations > 0 ? 1 : 0;
}

int run_table_cmd() {
  PenaltyTableResult table = penalty_table_check();
  std::printf("%-28s %12s %12s %10s\n", "instance", "expected", "computed",
              "|delta|");
  for (const auto& cell : table.cells)
    std::printf("%-28s %12.6f %12.6f %10.2e\n", cell.label.c_str(),
                cell.expected, cell.computed, cell.delta());
  if (!table.all_upper_bounds_hold)
    std::printf("candidate decompositions: objective exceeds one of them\n");
  bool ok = table.pass();
  std::printf("%s\n", ok ? "all values reproduced" : "MISMATCH");
  return ok ? 0 : 1;
}

struct GenArgs {
  std::string kind = "chain";
  int count = 25, size = 6, shift = 4;
  std::vector<int> dims = {8, 8, 1}, block = {5, 5, 1}, grid_shift = {2, 2, 1};
};

int run_gen_cmd(const GlobalOpts& g, const GenArgs& a) {
  GroupLayout layout;
  if (a.kind == "chain")
    layout = make_chain_layout(a.count, a.size, a.shift);
  else if (a.kind == "blocks")
    layout = make_block_layout(a.count, a.size);
  else if (a.kind == "singleton")
    layout = make_singleton_layout(a.count);
  else if (a.kind == "grid") {
    if (a.dims.size() != 3 || a.block.size() != 3 || a.grid_shift.size() != 3)
      throw std::invalid_argument("grid layout expects three values each for "
                                  "--dims, --block, --grid-shift");
    layout = make_grid_layout({a.dims[0], a.dims[1], a.dims[2]},
                              {a.block[0], a.block[1], a.block[2]},
                              {a.grid_shift[0], a.grid_shift[1],
                               a.grid_shift[2]});
  } else {
    throw std::invalid_argument("unknown layout kind '" + a.kind +
                                "' (expected chain, blocks, singleton, grid)");
  }
  std::string path = g.out.empty() ? "groups.txt" : g.out;
  write_groups_file(path, layout.groups);
  std::cout << "wrote " << path << ": K=" << layout.K << " p=" << layout.p
            << " L=" << layout.L << " R=" << layout.R << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse overlapping-group model fitting and experiment suite"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for trials")
      ->capture_default_str();
  app.add_flag("--reproducible", g.reproducible,
               "suppress timestamps and timing so reruns are byte-identical");
  app.add_option("--out", g.out, "output path (or stem for fit)");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit one model from CSV inputs");
  fit_cmd->add_option("--design", fit_args.design, "design matrix CSV")
      ->required();
  fit_cmd->add_option("--labels", fit_args.labels, "labels CSV, one per line")
      ->required();
  fit_cmd->add_option("--groups", fit_args.groups, "group file")->required();
  fit_cmd->add_option("--config", fit_args.config, "key = value config file");
  fit_cmd->add_flag("--header", fit_args.header, "inputs carry a header row");

  FitArgs cv_args;
  auto* cv_cmd =
      app.add_subcommand("cv", "cross-validate a config grid, then report");
  cv_cmd->add_option("--design", cv_args.design, "design matrix CSV")
      ->required();
  cv_cmd->add_option("--labels", cv_args.labels, "labels CSV")->required();
  cv_cmd->add_option("--groups", cv_args.groups, "group file")->required();
  cv_cmd->add_option("--config", cv_args.config,
                     "config with solver.eta1_grid / penalty.lambda1_grid");
  cv_cmd->add_flag("--header", cv_args.header, "inputs carry a header row");

  PhaseArgs phase_args;
  auto* phase_cmd = app.add_subcommand(
      "phase", "recovery error vs sample count over synthetic data");
  phase_cmd->add_option("--n-grid", phase_args.n_grid, "sample counts")
      ->delimiter(',');
  phase_cmd->add_option("--groups", phase_args.groups_file,
                        "group file (default: disjoint blocks)");
  phase_cmd->add_option("--blocks", phase_args.blocks, "K,L block layout")
      ->delimiter(',');
  phase_cmd->add_option("--k", phase_args.k, "active groups")
      ->capture_default_str();
  phase_cmd->add_option("--l", phase_args.l, "nonzeros per active group")
      ->capture_default_str();
  phase_cmd->add_option("--model", phase_args.model,
                        "sign, logistic or linear")
      ->capture_default_str();
  phase_cmd->add_option("--beta", phase_args.beta, "logistic steepness")
      ->capture_default_str();
  phase_cmd->add_option("--sigma", phase_args.sigma, "linear noise level")
      ->capture_default_str();
  phase_cmd->add_option("--rho", phase_args.rho, "ar1 design correlation")
      ->capture_default_str();
  phase_cmd->add_option("--trials", phase_args.trials, "trials per n")
      ->capture_default_str();
  phase_cmd->add_option("--methods", phase_args.methods,
                        "subset of lasso,glasso,oglasso,soglasso")
      ->delimiter(',');
  phase_cmd->add_option("--lambda1", phase_args.lambda1,
                        "soglasso l1/l2 tradeoff")
      ->capture_default_str();
  phase_cmd->add_option("--eta2", phase_args.eta2, "ridge weight")
      ->capture_default_str();
  phase_cmd->add_option("--eta1-frac", phase_args.eta1_frac,
                        "penalty weight as fraction of the zero threshold")
      ->delimiter(',');
  phase_cmd->add_option("--cv-folds", phase_args.cv_folds,
                        "folds for eta1 selection (0 = first fraction)")
      ->capture_default_str();
  phase_cmd->add_flag("--no-debias", phase_args.no_debias,
                      "report the raw penalized estimate");

  ToyArgs toy_args;
  auto* toy_cmd = app.add_subcommand(
      "toy-regression", "chain-group regression sweep over support density");
  toy_cmd->add_option("--num-groups", toy_args.num_groups, "chain length")
      ->capture_default_str();
  toy_cmd->add_option("--group-size", toy_args.group_size, "group size")
      ->capture_default_str();
  toy_cmd->add_option("--shift", toy_args.shift, "chain shift")
      ->capture_default_str();
  toy_cmd->add_option("--k", toy_args.k, "active groups")
      ->capture_default_str();
  toy_cmd->add_option("--n", toy_args.n, "samples per task")
      ->capture_default_str();
  toy_cmd->add_option("--trials", toy_args.trials, "trials per alpha")
      ->capture_default_str();
  toy_cmd->add_option("--tasks", toy_args.tasks, "stacked tasks")
      ->capture_default_str();
  toy_cmd->add_option("--alpha-grid", toy_args.alpha_grid,
                      "retained fraction grid")
      ->delimiter(',');
  toy_cmd->add_option("--sigma", toy_args.sigma, "noise level")
      ->capture_default_str();
  toy_cmd->add_option("--methods", toy_args.methods, "methods to compare")
      ->delimiter(',');
  toy_cmd->add_option("--eta1-frac", toy_args.eta1_frac,
                      "clairvoyant penalty-weight grid")
      ->delimiter(',');
  toy_cmd->add_option("--lambda1-grid", toy_args.lambda1_grid,
                      "soglasso tradeoff grid")
      ->delimiter(',');

  int width_trials = 2000, chisq_trials = 2000;
  auto* width_cmd = app.add_subcommand(
      "width", "Monte-Carlo width and max-chi-square bound checks");
  width_cmd->add_option("--trials", width_trials, "width trials per row")
      ->capture_default_str();
  width_cmd->add_option("--chisq-trials", chisq_trials,
                        "chi-square trials per row")
      ->capture_default_str();

  auto* table_cmd = app.add_subcommand(
      "penalty-table", "recompute the worked penalty examples");

  GenArgs gen_args;
  auto* gen_cmd =
      app.add_subcommand("gen-groups", "write a generated group file");
  gen_cmd->add_option("--kind", gen_args.kind,
                      "chain, blocks, singleton or grid")
      ->capture_default_str();
  gen_cmd->add_option("--count", gen_args.count,
                      "groups (chain/blocks) or coordinates (singleton)")
      ->capture_default_str();
  gen_cmd->add_option("--size", gen_args.size, "group size")
      ->capture_default_str();
  gen_cmd->add_option("--shift", gen_args.shift, "chain shift")
      ->capture_default_str();
  gen_cmd->add_option("--dims", gen_args.dims, "grid extent x,y,z")
      ->delimiter(',');
  gen_cmd->add_option("--block", gen_args.block, "grid block x,y,z")
      ->delimiter(',');
  gen_cmd->add_option("--grid-shift", gen_args.grid_shift,
                      "grid block shift x,y,z")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (*fit_cmd) return run_fit(g, fit_args);
    if (*cv_cmd) return run_cv(g, cv_args);
    if (*phase_cmd) return run_phase_cmd(g, phase_args);
    if (*toy_cmd) return run_toy_cmd(g, toy_args);
    if (*width_cmd) return run_width_cmd(g, width_trials, chisq_trials);
    if (*table_cmd) return run_table_cmd();
    if (*gen_cmd) return run_gen_cmd(g, gen_args);
  } catch (const PenaltyNonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolverNumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
