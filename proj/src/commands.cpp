#include "lrvmc/commands.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "lrvmc/checkpoint.hpp"
#include "lrvmc/exact.hpp"
#include "lrvmc/observables.hpp"
#include "lrvmc/svg.hpp"

namespace lrvmc {

namespace {

using nlohmann::json;

std::string timestamp() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json run_manifest(const RunConfiguration& config, const TransverseFieldIsingModel& model,
                  const Ansatz& ansatz) {
  json m;
  m["version"] = kVersion;
  m["created"] = timestamp();
  m["config"] = run_configuration_to_json(config);
  m["coupling"] = coupling_metadata(model);
  m["ansatz"] = ansatz_metadata(ansatz);
  m["seed"] = config.seed;
  return m;
}

// Final-state observables from a fresh sample batch.
json measure_observables(const TransverseFieldIsingModel& model, const Ansatz& ansatz,
                         const Eigen::VectorXd& theta, const SamplerConfig& sampler_config,
                         int table_threshold) {
  const int n = model.n_sites();
  const BatchedLogPsiFn callback = n <= table_threshold
                                       ? make_tabulated_log_psi(ansatz, theta)
                                       : make_batched_log_psi(ansatz, theta);
  SamplerConfig cfg = sampler_config;
  cfg.seed = sampler_config.seed + 0x5eedu;  // measurement stream, distinct from training
  SamplerState state = initialize_sampler(cfg, n, callback);
  const SampleBatch batch = sample_batch(state, cfg, callback);

  const double q = wavevector_for_coupling(model.coupling.coupling_strength);
  const MagnetizationResult mag = m_squared_estimator(batch.configurations, q);
  const RenyiResult renyi = renyi2_from_batch(batch.configurations, callback);
  const Eigen::VectorXd energies =
      local_energy_batch(model, batch.configurations, batch.log_psi, callback);
  const VScoreResult vs = v_score(energies, n);

  json obs;
  obs["q"] = q;
  obs["m2"] = mag.m2_mean;
  obs["m2_error"] = mag.std_error;
  obs["s2"] = renyi.s2;
  obs["s2_error"] = renyi.std_error;
  obs["renyi_undersampled"] = renyi.undersampled;
  obs["energy"] = vs.mean_energy;
  obs["energy_variance"] = vs.energy_variance;
  obs["v_score"] = vs.defined ? json(vs.value) : json();
  obs["samples"] = batch.configurations.cols();
  return obs;
}

}  // namespace

void append_observables_csv(const std::filesystem::path& file, double coupling, double alpha,
                            int n_sites, double m2, double m2_err, double s2, double s2_err,
                            double v_score_value) {
  const bool fresh = !std::filesystem::exists(file);
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("observables: cannot append to " + file.string());
  if (fresh) out << "J,alpha,N,m2,m2_error,s2,s2_error,v_score\n";
  char row[256];
  std::snprintf(row, sizeof(row), "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g", coupling,
                alpha, n_sites, m2, m2_err, s2, s2_err, v_score_value);
  out << row << '\n';
}

TrainOutcome cmd_train(const TrainCommandOptions& options) {
  const RunConfiguration& config = options.config;
  const TransverseFieldIsingModel model = make_model(config.model);
  const std::unique_ptr<Ansatz> ansatz = make_ansatz(config.ansatz, config.model.n_sites);

  const std::filesystem::path run_dir = config.output_dir;
  std::filesystem::create_directories(run_dir);

  Eigen::VectorXd theta;
  if (options.resume_checkpoint) {
    const Checkpoint ck = load_checkpoint(*options.resume_checkpoint);
    if (ck.parameters.size() != ansatz->parameter_count()) {
      throw ConfigError("train: checkpoint parameter count does not match the ansatz");
    }
    theta = ck.parameters;
  } else {
    theta = ansatz->initial_parameters(config.seed);
  }

  json manifest = run_manifest(config, model, *ansatz);
  {
    std::ofstream out(run_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }

  SamplerConfig sampler_config = config.sampler;
  sampler_config.seed = config.seed;

  std::ofstream trace(run_dir / "energy_trace.csv");
  std::ofstream acceptance(run_dir / "acceptance_log.csv");
  trace << train_trace_header() << '\n';
  acceptance << acceptance_log_header() << '\n';

  TrainOptions train_options;
  train_options.max_iterations = config.optimizer.max_iterations;
  train_options.learning_rate = config.optimizer.learning_rate;
  train_options.diagonal_shift = config.optimizer.diagonal_shift;
  train_options.table_threshold = config.optimizer.table_threshold;
  train_options.dense_solver_threshold = config.optimizer.dense_solver_threshold;
  train_options.checkpoint_every = config.optimizer.checkpoint_every;
  train_options.trace_stream = &trace;
  train_options.acceptance_stream = &acceptance;
  train_options.verbose = options.verbose;
  train_options.checkpoint_hook = [&](int iteration, const Eigen::VectorXd& params) {
    json ck = manifest;
    ck["iteration"] = iteration;
    save_checkpoint(run_dir / ("checkpoint_" + std::to_string(iteration)), ck, params);
  };

  TrainOutcome outcome;
  outcome.run_dir = run_dir;
  outcome.result = train(model, *ansatz, std::move(theta), sampler_config, train_options);

  json final_manifest = manifest;
  final_manifest["iteration"] = outcome.result.iterations_completed;
  save_checkpoint(run_dir / "checkpoint_final", final_manifest, outcome.result.parameters);

  outcome.observables = measure_observables(model, *ansatz, outcome.result.parameters,
                                            sampler_config, config.optimizer.table_threshold);
  {
    std::ofstream out(run_dir / "observables.json");
    out << outcome.observables.dump(2) << '\n';
  }
  append_observables_csv(run_dir / "observables.csv", config.model.coupling,
                         config.model.alpha, config.model.n_sites,
                         outcome.observables["m2"].get<double>(),
                         outcome.observables["m2_error"].get<double>(),
                         outcome.observables["s2"].get<double>(),
                         outcome.observables["s2_error"].get<double>(),
                         outcome.observables["v_score"].is_null()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : outcome.observables["v_score"].get<double>());
  return outcome;
}

std::filesystem::path cmd_sweep(const SweepOptions& options) {
  if (options.j_grid.empty() || options.alpha_grid.empty()) {
    throw ConfigError("sweep: J and alpha grids must be non-empty");
  }
  const std::filesystem::path out_dir = options.base.output_dir;
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep.csv");
  csv << "alpha,J,m2,m2_error,v_score,status\n";

  std::vector<double> m2_grid(options.j_grid.size() * options.alpha_grid.size(),
                              std::numeric_limits<double>::quiet_NaN());
  for (std::size_t ai = 0; ai < options.alpha_grid.size(); ++ai) {
    for (std::size_t ji = 0; ji < options.j_grid.size(); ++ji) {
      RunConfiguration config = options.base;
      config.model.alpha = options.alpha_grid[ai];
      config.model.coupling = options.j_grid[ji];
      std::ostringstream point;
      point << "point_a" << config.model.alpha << "_J" << config.model.coupling;
      config.output_dir = (out_dir / point.str()).string();
      std::string status = "ok";
      double m2 = std::numeric_limits<double>::quiet_NaN();
      double m2_err = m2, vs = m2;
      try {
        TrainCommandOptions train_options;
        train_options.config = config;
        train_options.verbose = options.verbose;
        const TrainOutcome outcome = cmd_train(train_options);
        m2 = outcome.observables["m2"].get<double>();
        m2_err = outcome.observables["m2_error"].get<double>();
        if (!outcome.observables["v_score"].is_null()) {
          vs = outcome.observables["v_score"].get<double>();
        }
        m2_grid[ai * options.j_grid.size() + ji] = m2;
      } catch (const std::exception& e) {
        status = std::string("failed: ") + e.what();
      }
      char row[256];
      std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g,", options.alpha_grid[ai],
                    options.j_grid[ji], m2, m2_err, vs);
      csv << row << status << '\n';
      csv.flush();
    }
  }
  write_heatmap_svg(out_dir / "sweep_m2.svg", options.j_grid, options.alpha_grid, m2_grid, "J",
                    "alpha", "squared staggered magnetization");
  return out_dir;
}

std::filesystem::path cmd_compare(const CompareOptions& options) {
  if (options.j_grid.empty()) throw ConfigError("compare: J grid must be non-empty");
  if (!(options.budget_seconds > 0.0)) throw ConfigError("compare: budget must be positive");
  const std::filesystem::path out_dir = options.base.output_dir;
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "compare.csv");
  csv << "model,density,J,parameter_count,iterations,energy,v_score,seconds\n";

  struct Entry {
    std::string label;
    AnsatzConfig ansatz;
    int density = 0;
  };
  std::vector<Entry> entries;
  {
    Entry vit;
    vit.label = "vit";
    vit.ansatz = options.base.ansatz;
    vit.ansatz.type = "vit";
    entries.push_back(vit);
    for (int density : options.rbm_densities) {
      Entry rbm;
      rbm.label = "rbm" + std::to_string(density);
      rbm.ansatz = options.base.ansatz;
      rbm.ansatz.type = "rbm";
      rbm.ansatz.rbm.density = density;
      rbm.ansatz.rbm.hidden_width = -1;
      rbm.density = density;
      entries.push_back(rbm);
    }
  }

  json meta;
  meta["budget_seconds"] = options.budget_seconds;
  meta["budget_kind"] = options.wall_clock ? "wall_clock" : "process_cpu";
  std::vector<PlotSeries> curves;
  const TransverseFieldIsingModel base_model = make_model(options.base.model);

  for (const Entry& entry : entries) {
    const std::unique_ptr<Ansatz> ansatz =
        make_ansatz(entry.ansatz, options.base.model.n_sites);
    meta["parameter_count"][entry.label] = ansatz->parameter_count();
    if (entry.label == "vit") {
      meta["parameter_breakdown"]["vit"] = ansatz_metadata(*ansatz)["layout"];
    }
    PlotSeries series;
    series.label = entry.label;
    for (double j : options.j_grid) {
      RunConfiguration config = options.base;
      config.model.coupling = j;
      config.ansatz = entry.ansatz;
      const TransverseFieldIsingModel model = make_model(config.model);
      SamplerConfig sampler_config = config.sampler;
      sampler_config.seed = config.seed;

      TrainOptions train_options;
      train_options.max_iterations = config.optimizer.max_iterations;
      train_options.learning_rate = config.optimizer.learning_rate;
      train_options.diagonal_shift = config.optimizer.diagonal_shift;
      train_options.table_threshold = config.optimizer.table_threshold;
      train_options.dense_solver_threshold = config.optimizer.dense_solver_threshold;
      train_options.budget_seconds = options.budget_seconds;
      train_options.budget_wall_clock = options.wall_clock;
      train_options.verbose = options.verbose;

      const auto t0 = std::clock();
      const TrainResult result = train(model, *ansatz, ansatz->initial_parameters(config.seed),
                                       sampler_config, train_options);
      const double seconds = static_cast<double>(std::clock() - t0) / CLOCKS_PER_SEC;
      const double energy =
          result.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : result.trace.back().energy;
      const double vs = result.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : result.trace.back().v_score;
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%d,%.17g,%lld,%d,%.17g,%.17g,%.6g",
                    entry.label.c_str(), entry.density, j,
                    static_cast<long long>(ansatz->parameter_count()),
                    result.iterations_completed, energy, vs, seconds);
      csv << row << '\n';
      csv.flush();
      series.x.push_back(j);
      series.y.push_back(vs);
      if (options.verbose) {
        std::fprintf(stderr, "compare %s J=%g: %d iterations, vscore %.3e\n",
                     entry.label.c_str(), j, result.iterations_completed, vs);
      }
    }
    curves.push_back(std::move(series));
  }
  {
    std::ofstream out(out_dir / "compare_meta.json");
    out << meta.dump(2) << '\n';
  }
  write_line_plot_svg(out_dir / "compare_vscore.svg", curves, "J", "V-score",
                      "wave-function quality under a fixed budget", /*log_y=*/true);
  (void)base_model;
  return out_dir;
}

nlohmann::json cmd_exact(const ExactOptions& options) {
  if (options.model.n_sites > 14) throw ConfigError("exact: N must be <= 14");
  const TransverseFieldIsingModel model = make_model(options.model);
  const double q = std::isnan(options.q)
                       ? wavevector_for_coupling(options.model.coupling)
                       : options.q;

  json report;
  std::filesystem::path cache_file;
  if (!options.cache_dir.empty()) {
    char key[160];
    std::snprintf(key, sizeof(key), "ed_N%d_a%.6f_J%.6f_b%.4f_h%.4f_kac%d_st%d_q%.4f_ring.json",
                  options.model.n_sites, options.model.alpha, options.model.coupling,
                  options.model.self_term, options.model.field, options.model.kac_on ? 1 : 0,
                  options.model.include_self_term ? 1 : 0, q);
    cache_file = options.cache_dir / key;
    if (std::filesystem::exists(cache_file)) {
      std::ifstream in(cache_file);
      in >> report;
    }
  }
  if (report.empty()) {
    const ExactSolution solution = ground_state(model);
    const ExactObservables obs = exact_observables(solution, q);
    report["n_sites"] = options.model.n_sites;
    report["alpha"] = options.model.alpha;
    report["coupling"] = options.model.coupling;
    report["q"] = q;
    report["ground_energy"] = solution.ground_energy;
    report["gap"] = solution.gap;
    report["m2"] = obs.m2;
    report["s2"] = obs.s2;
    report["kac_factor"] = model.coupling.kac_factor;
    if (!cache_file.empty()) {
      std::filesystem::create_directories(options.cache_dir);
      std::ofstream out(cache_file);
      out << report.dump(2) << '\n';
    }
  }

  if (options.checkpoint_stem) {
    const Checkpoint ck = load_checkpoint(*options.checkpoint_stem);
    const RunConfiguration ck_config =
        parse_run_configuration(ck.manifest.at("config"));
    const std::unique_ptr<Ansatz> ansatz =
        make_ansatz(ck_config.ansatz, ck_config.model.n_sites);
    if (ck_config.model.n_sites != options.model.n_sites) {
      throw ConfigError("exact: checkpoint size does not match the model");
    }
    const ExactVariational var =
        exact_variational(model, make_batched_log_psi(*ansatz, ck.parameters), q);
    const double e0 = report["ground_energy"].get<double>();
    report["checkpoint"] = {
        {"energy", var.energy},
        {"variance", var.variance},
        {"m2", var.m2},
        {"relative_energy_error", std::abs(var.energy - e0) / std::abs(e0)}};
  }

  if (!options.output.empty()) {
    if (options.output.has_parent_path()) {
      std::filesystem::create_directories(options.output.parent_path());
    }
    std::ofstream out(options.output);
    out << report.dump(2) << '\n';
  }
  return report;
}

CriticalFit cmd_fssa(const FssaCommandOptions& options) {
  const ScalingDataset dataset = ScalingDataset::from_csv(options.input_csv);
  const CriticalFit fit = fit_critical(dataset, options.fit);

  std::filesystem::create_directories(options.output_dir);
  json report;
  report["j_c"] = fit.j_c;
  report["j_c_error"] = fit.j_c_error;
  report["nu"] = fit.nu;
  report["nu_error"] = fit.nu_error;
  report["beta"] = fit.beta;
  report["beta_error"] = fit.beta_error;
  report["quality"] = fit.quality;
  report["window"] = {fit.window[0], fit.window[1]};
  report["evaluations"] = fit.evaluations;
  if (!std::isnan(options.alpha)) {
    const double kac =
        build_coupling(options.alpha, 1.0, options.self_term, options.kac_size, true)
            .kac_factor;
    const DerivedCriticalQuantities derived = derived_critical_quantities(fit.j_c, kac);
    report["kac_factor"] = kac;
    report["j_tilde_c"] = derived.j_tilde_c;
    report["h_tilde_c"] = derived.h_tilde_c;
    report["theta_c"] = derived.theta_c;
  }
  {
    std::ofstream out(options.output_dir / "critical_fit.json");
    out << report.dump(2) << '\n';
  }

  // Collapsed points, grouped by size for the scatter plot.
  std::ofstream csv(options.output_dir / "collapse.csv");
  csv << "N,J,x,y,y_error\n";
  std::map<double, PlotSeries> groups;
  const ScalingDataset window_data = dataset.restricted(fit.window[0], fit.window[1]);
  for (const auto& rec : window_data.points) {
    const ScaledPoint sp = scale_transform(rec, fit.j_c, fit.nu, fit.beta);
    char row[192];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g", rec.size, rec.coupling,
                  sp.x, sp.y, sp.y_error);
    csv << row << '\n';
    PlotSeries& g = groups[rec.size];
    if (g.label.empty()) g.label = "N=" + std::to_string(static_cast<int>(rec.size));
    g.x.push_back(sp.x);
    g.y.push_back(sp.y);
  }
  std::vector<PlotSeries> series;
  for (auto& [size, g] : groups) series.push_back(std::move(g));
  write_scatter_svg(options.output_dir / "collapse.svg", series, "N^{1/nu} (J - J_c)",
                    "m2 N^{2 beta/nu}", "finite-size scaling collapse");
  return fit;
}

nlohmann::json cmd_observe(const ObserveOptions& options) {
  const Checkpoint ck = load_checkpoint(options.checkpoint_stem);
  RunConfiguration config = parse_run_configuration(ck.manifest.at("config"));
  const TransverseFieldIsingModel model = make_model(config.model);
  const std::unique_ptr<Ansatz> ansatz = make_ansatz(config.ansatz, config.model.n_sites);
  if (ck.parameters.size() != ansatz->parameter_count()) {
    throw ConfigError("observe: checkpoint parameter count does not match its ansatz");
  }
  SamplerConfig sampler_config = config.sampler;
  if (options.n_chains) sampler_config.n_chains = *options.n_chains;
  if (options.samples) sampler_config.samples_per_iteration = *options.samples;
  sampler_config.seed = options.seed;

  json obs = measure_observables(model, *ansatz, ck.parameters, sampler_config,
                                 config.optimizer.table_threshold);
  obs["checkpoint"] = options.checkpoint_stem.string();
  if (!options.output.empty()) {
    if (options.output.has_parent_path()) {
      std::filesystem::create_directories(options.output.parent_path());
    }
    std::ofstream out(options.output);
    out << obs.dump(2) << '\n';
    append_observables_csv(options.output.parent_path() / "observables.csv",
                           config.model.coupling, config.model.alpha, config.model.n_sites,
                           obs["m2"].get<double>(), obs["m2_error"].get<double>(),
                           obs["s2"].get<double>(), obs["s2_error"].get<double>(),
                           obs["v_score"].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                    : obs["v_score"].get<double>());
  }
  return obs;
}

}  // namespace lrvmc
