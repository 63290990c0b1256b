#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <vector>

#include "lrvmc/config.hpp"
#include "lrvmc/fssa.hpp"
#include "lrvmc/sr.hpp"

namespace lrvmc {

// Subcommand entry points; configuration problems raise ConfigError (exit 2),
// numerical aborts raise NumericalFailure (exit 3).

struct TrainCommandOptions {
  RunConfiguration config;
  std::optional<std::filesystem::path> resume_checkpoint;  // stem without extension
  bool verbose = false;
};

struct TrainOutcome {
  std::filesystem::path run_dir;
  TrainResult result;
  nlohmann::json observables;
};

// Writes manifest.json, energy_trace.csv, acceptance_log.csv, observables, and
// a final checkpoint into the configured output directory.
TrainOutcome cmd_train(const TrainCommandOptions& options);

struct SweepOptions {
  RunConfiguration base;  // model coupling/alpha replaced per grid point
  std::vector<double> j_grid;
  std::vector<double> alpha_grid;
  bool verbose = false;
};

// One single-shot training per grid point; per-point failures are recorded and
// the sweep continues. Emits sweep.csv and an <m^2> heatmap SVG.
std::filesystem::path cmd_sweep(const SweepOptions& options);

struct CompareOptions {
  RunConfiguration base;
  std::vector<double> j_grid;
  std::vector<int> rbm_densities = {1, 2, 4};
  double budget_seconds = 180.0;  // per point per model
  bool wall_clock = false;        // default: process CPU time
  bool verbose = false;
};

// Budgeted ViT-vs-RBM comparison; emits compare.csv, V-score curves SVG, and
// parameter-count metadata.
std::filesystem::path cmd_compare(const CompareOptions& options);

struct ExactOptions {
  ModelConfig model;
  double q = std::numeric_limits<double>::quiet_NaN();  // NaN: from the sign of J
  std::filesystem::path output;                          // report JSON path
  std::filesystem::path cache_dir;                       // empty: no cache
  std::optional<std::filesystem::path> checkpoint_stem;  // side-by-side comparison
};

nlohmann::json cmd_exact(const ExactOptions& options);

struct FssaCommandOptions {
  std::filesystem::path input_csv;
  std::filesystem::path output_dir;
  FssaOptions fit;
  // Optional Kac context for the derived critical quantities.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  int kac_size = 10000;
  double self_term = 1.0;
};

CriticalFit cmd_fssa(const FssaCommandOptions& options);

struct ObserveOptions {
  std::filesystem::path checkpoint_stem;
  std::filesystem::path output;  // JSON report; CSV row appended next to it
  std::optional<int> n_chains;
  std::optional<int> samples;
  std::uint64_t seed = 1;
};

nlohmann::json cmd_observe(const ObserveOptions& options);

// Shared helper: appends one observables row, writing the header when new.
void append_observables_csv(const std::filesystem::path& file, double coupling, double alpha,
                            int n_sites, double m2, double m2_err, double s2, double s2_err,
                            double v_score_value);

}  // namespace lrvmc
