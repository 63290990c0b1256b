// lrvmc: variational Monte Carlo for the long-range transverse-field Ising
// chain with transformer and RBM wave functions.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lrvmc/commands.hpp"

namespace {

using lrvmc::RunConfiguration;

struct CommonFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_sites;
  std::optional<double> alpha;
  std::optional<double> coupling;
  std::optional<bool> kac_on;
  std::optional<std::string> ansatz_type;
  std::optional<int> iterations;
  std::optional<int> n_chains;
  std::optional<int> samples;
  std::optional<std::string> output;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config_file, "run configuration JSON file");
  cmd->add_option("--seed", flags.seed, "global seed (overrides the file)");
  cmd->add_option("-n,--n-sites", flags.n_sites, "chain length N");
  cmd->add_option("-a,--alpha", flags.alpha, "interaction-decay exponent");
  cmd->add_option("-J,--coupling", flags.coupling, "coupling J in units of h_x");
  cmd->add_option("--kac", flags.kac_on, "apply the Kac normalization");
  cmd->add_option("--ansatz", flags.ansatz_type, "ansatz type: vit|rbm|mlp");
  cmd->add_option("--iterations", flags.iterations, "training iterations");
  cmd->add_option("--chains", flags.n_chains, "Markov chains");
  cmd->add_option("--samples", flags.samples, "samples per iteration");
  cmd->add_option("-o,--output", flags.output, "output directory");
  cmd->add_flag("-v,--verbose", flags.verbose, "per-iteration progress on stderr");
}

RunConfiguration build_config(const CommonFlags& flags) {
  RunConfiguration config;
  if (!flags.config_file.empty()) config = lrvmc::load_run_configuration(flags.config_file);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.n_sites) config.model.n_sites = *flags.n_sites;
  if (flags.alpha) config.model.alpha = *flags.alpha;
  if (flags.coupling) config.model.coupling = *flags.coupling;
  if (flags.kac_on) config.model.kac_on = *flags.kac_on;
  if (flags.ansatz_type) config.ansatz.type = *flags.ansatz_type;
  if (flags.iterations) config.optimizer.max_iterations = *flags.iterations;
  if (flags.n_chains) config.sampler.n_chains = *flags.n_chains;
  if (flags.samples) config.sampler.samples_per_iteration = *flags.samples;
  if (flags.output) config.output_dir = *flags.output;
  return config;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational ground-state search for long-range Ising chains"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string resume_stem;
  auto* train_cmd = app.add_subcommand("train", "optimize a wave function");
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--resume", resume_stem, "checkpoint stem to resume from");

  CommonFlags sweep_flags;
  std::vector<double> j_range{-4.0, 4.0}, alpha_range{0.4, 6.0};
  int j_count = 10, alpha_count = 10;
  auto* sweep_cmd = app.add_subcommand("sweep", "phase-diagram grid of single-shot runs");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--j-range", j_range, "J range: lo hi")->expected(2);
  sweep_cmd->add_option("--j-count", j_count, "J grid points");
  sweep_cmd->add_option("--alpha-range", alpha_range, "alpha range: lo hi")->expected(2);
  sweep_cmd->add_option("--alpha-count", alpha_count, "alpha grid points");

  CommonFlags compare_flags;
  std::vector<double> compare_j{-4.0, 4.0};
  int compare_count = 10;
  double budget = 180.0;
  bool wall_clock = false;
  std::vector<int> densities{1, 2, 4};
  auto* compare_cmd =
      app.add_subcommand("compare", "budgeted ViT vs RBM quality comparison");
  add_common(compare_cmd, compare_flags);
  compare_cmd->add_option("--j-range", compare_j, "J range: lo hi")->expected(2);
  compare_cmd->add_option("--j-count", compare_count, "J grid points");
  compare_cmd->add_option("--budget", budget, "training budget per point in seconds");
  compare_cmd->add_flag("--wall-clock", wall_clock,
                        "budget wall-clock time instead of process CPU time");
  compare_cmd->add_option("--densities", densities, "RBM densities to compare");

  CommonFlags exact_flags;
  std::string exact_output = "exact_report.json", cache_dir = "oracle_cache";
  std::string exact_checkpoint;
  double exact_q = std::numeric_limits<double>::quiet_NaN();
  auto* exact_cmd = app.add_subcommand("exact", "exact-diagonalization oracle report");
  add_common(exact_cmd, exact_flags);
  exact_cmd->add_option("--q", exact_q, "wavevector (default: from the sign of J)");
  exact_cmd->add_option("--report", exact_output, "report JSON path");
  exact_cmd->add_option("--cache-dir", cache_dir, "oracle cache directory ('' disables)");
  exact_cmd->add_option("--checkpoint", exact_checkpoint, "checkpoint stem to compare");

  std::string fssa_input, fssa_output = "fssa_out";
  double fssa_jc = 1.0, fssa_nu = 1.0, fssa_beta = 0.1;
  std::vector<double> fssa_window;
  double fssa_alpha = std::numeric_limits<double>::quiet_NaN();
  int fssa_bootstrap = 0;
  auto* fssa_cmd = app.add_subcommand("fssa", "finite-size-scaling collapse fit");
  fssa_cmd->add_option("-i,--input", fssa_input, "CSV with header N,J,value,error")
      ->required();
  fssa_cmd->add_option("-o,--output", fssa_output, "output directory");
  fssa_cmd->add_option("--jc", fssa_jc, "initial J_c guess");
  fssa_cmd->add_option("--nu", fssa_nu, "initial nu guess");
  fssa_cmd->add_option("--beta", fssa_beta, "initial beta guess");
  fssa_cmd->add_option("--window", fssa_window, "J window: lo hi")->expected(2);
  fssa_cmd->add_option("--alpha", fssa_alpha,
                       "decay exponent, enables the derived h_c/theta_c columns");
  fssa_cmd->add_option("--bootstrap", fssa_bootstrap, "bootstrap resamples for the errors");

  std::string observe_stem, observe_output = "observe.json";
  std::uint64_t observe_seed = 1;
  std::optional<int> observe_chains, observe_samples;
  auto* observe_cmd = app.add_subcommand("observe", "measure observables from a checkpoint");
  observe_cmd->add_option("--checkpoint", observe_stem, "checkpoint stem")->required();
  observe_cmd->add_option("-o,--output", observe_output, "report JSON path");
  observe_cmd->add_option("--seed", observe_seed, "sampling seed");
  observe_cmd->add_option("--chains", observe_chains, "Markov chains");
  observe_cmd->add_option("--samples", observe_samples, "sample count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      lrvmc::TrainCommandOptions options;
      options.config = build_config(train_flags);
      if (!resume_stem.empty()) options.resume_checkpoint = resume_stem;
      options.verbose = train_flags.verbose;
      const auto outcome = lrvmc::cmd_train(options);
      std::printf("run directory: %s\n", outcome.run_dir.string().c_str());
      if (!outcome.result.trace.empty()) {
        std::printf("final energy: %.10g\n", outcome.result.trace.back().energy);
      }
    } else if (sweep_cmd->parsed()) {
      lrvmc::SweepOptions options;
      options.base = build_config(sweep_flags);
      options.j_grid = linspace(j_range[0], j_range[1], j_count);
      options.alpha_grid = linspace(alpha_range[0], alpha_range[1], alpha_count);
      options.verbose = sweep_flags.verbose;
      const auto dir = lrvmc::cmd_sweep(options);
      std::printf("sweep directory: %s\n", dir.string().c_str());
    } else if (compare_cmd->parsed()) {
      lrvmc::CompareOptions options;
      options.base = build_config(compare_flags);
      options.j_grid = linspace(compare_j[0], compare_j[1], compare_count);
      options.budget_seconds = budget;
      options.wall_clock = wall_clock;
      options.rbm_densities = densities;
      options.verbose = compare_flags.verbose;
      const auto dir = lrvmc::cmd_compare(options);
      std::printf("comparison directory: %s\n", dir.string().c_str());
    } else if (exact_cmd->parsed()) {
      lrvmc::ExactOptions options;
      options.model = build_config(exact_flags).model;
      options.q = exact_q;
      options.output = exact_output;
      options.cache_dir = cache_dir;
      if (!exact_checkpoint.empty()) options.checkpoint_stem = exact_checkpoint;
      const auto report = lrvmc::cmd_exact(options);
      std::printf("%s\n", report.dump(2).c_str());
    } else if (fssa_cmd->parsed()) {
      lrvmc::FssaCommandOptions options;
      options.input_csv = fssa_input;
      options.output_dir = fssa_output;
      options.fit.j_c = fssa_jc;
      options.fit.nu = fssa_nu;
      options.fit.beta = fssa_beta;
      if (fssa_window.size() == 2) options.fit.window = {fssa_window[0], fssa_window[1]};
      options.fit.bootstrap_samples = fssa_bootstrap;
      options.alpha = fssa_alpha;
      const auto fit = lrvmc::cmd_fssa(options);
      std::printf("J_c = %.6g +- %.2g   nu = %.4g +- %.2g   beta = %.4g +- %.2g   Q = %.4g\n",
                  fit.j_c, fit.j_c_error, fit.nu, fit.nu_error, fit.beta, fit.beta_error,
                  fit.quality);
    } else if (observe_cmd->parsed()) {
      lrvmc::ObserveOptions options;
      options.checkpoint_stem = observe_stem;
      options.output = observe_output;
      options.seed = observe_seed;
      options.n_chains = observe_chains;
      options.samples = observe_samples;
      const auto obs = lrvmc::cmd_observe(options);
      std::printf("%s\n", obs.dump(2).c_str());
    }
  } catch (const lrvmc::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const lrvmc::NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
