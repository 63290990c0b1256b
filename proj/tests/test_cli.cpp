#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>

#include "lrvmc/checkpoint.hpp"
#include "lrvmc/commands.hpp"
#include "lrvmc/vit.hpp"
#include "testutil.hpp"

using namespace lrvmc;
using nlohmann::json;

namespace {

// Small, fast training configuration on an RBM.
RunConfiguration smoke_config(const std::filesystem::path& dir) {
  RunConfiguration config;
  config.model.n_sites = 6;
  config.model.alpha = 2.5;
  config.model.coupling = -1.0;
  config.ansatz.type = "rbm";
  config.sampler.n_chains = 16;
  config.sampler.samples_per_iteration = 64;
  config.optimizer.max_iterations = 4;
  config.output_dir = dir.string();
  config.seed = 42;
  return config;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("config: defaults parse from an empty object") {
  const RunConfiguration config = parse_run_configuration(json::object());
  CHECK(config.model.n_sites == 50);
  CHECK(config.ansatz.type == "vit");
  CHECK(config.sampler.n_chains == 1024);
  CHECK(config.sampler.samples_per_iteration == 4096);
  CHECK(config.optimizer.learning_rate.initial == 0.1);
  CHECK(config.optimizer.learning_rate.peak == 2.0);
  CHECK(config.optimizer.learning_rate.warmup_iterations == 75);
  CHECK(config.optimizer.learning_rate.decay_ratio == 0.995);
  CHECK(config.optimizer.diagonal_shift.start == 1e-2);
  CHECK(config.optimizer.diagonal_shift.end == 1e-4);
  CHECK(config.optimizer.max_iterations == 250);
}

TEST_CASE("config: unknown keys rejected with their name") {
  json j;
  j["model"] = {{"n_sites", 10}, {"spooky", 1}};
  try {
    (void)parse_run_configuration(j);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("spooky") != std::string::npos);
  }
  json top;
  top["modle"] = json::object();
  CHECK_THROWS_AS((void)parse_run_configuration(top), ConfigError);
}

TEST_CASE("config: value validation") {
  json j;
  j["model"] = {{"n_sites", 0}};
  CHECK_THROWS_AS((void)parse_run_configuration(j), ConfigError);
  j = json::object();
  j["ansatz"] = {{"type", "tensor-train"}};
  CHECK_THROWS_AS((void)parse_run_configuration(j), ConfigError);
  j = json::object();
  j["sampler"] = {{"n_chains", 3}, {"samples_per_iteration", 10}};
  CHECK_THROWS_AS((void)parse_run_configuration(j), std::invalid_argument);
}

TEST_CASE("config: serialization round trip") {
  RunConfiguration config;
  config.model.coupling = -2.09;
  config.ansatz.type = "rbm";
  config.ansatz.rbm.density = 2;
  config.seed = 777;
  const json j = run_configuration_to_json(config);
  const RunConfiguration back = parse_run_configuration(j);
  CHECK(run_configuration_to_json(back).dump() == j.dump());
}

TEST_CASE("config: table-default ansatz resolved at N = 50") {
  const RunConfiguration config = parse_run_configuration(json::object());
  const auto ansatz = make_ansatz(config.ansatz, config.model.n_sites);
  const auto* vit = dynamic_cast<const ViTAnsatz*>(ansatz.get());
  REQUIRE(vit != nullptr);
  CHECK(vit->hyperparameters().token_dim == 5);
  CHECK(vit->hyperparameters().n_tokens() == 10);
  CHECK(vit->hyperparameters().embed_dim == 14);
  CHECK(vit->hyperparameters().heads == 2);
  CHECK(vit->hyperparameters().head_dim() == 7);
  CHECK(vit->hyperparameters().core_mlp_layers == 3);
  CHECK(vit->hyperparameters().postprocessor_dims == std::vector<int>{5});
}

TEST_CASE("checkpoint: bit-exact round trip") {
  const auto dir = test::scratch_dir("checkpoint");
  Eigen::VectorXd params(6);
  params << 1.0, -0.0, 1e-308, -3.1415926535897931, 0.1, 7e300;
  json manifest;
  manifest["note"] = "round trip";
  save_checkpoint(dir / "ck", manifest, params);
  const Checkpoint back = load_checkpoint(dir / "ck");
  REQUIRE(back.parameters.size() == 6);
  for (int i = 0; i < 6; ++i) {
    std::uint64_t a, b;
    std::memcpy(&a, &params[i], 8);
    std::memcpy(&b, &back.parameters[i], 8);
    CHECK(a == b);
  }
  CHECK(back.manifest.at("note") == "round trip");
}

TEST_CASE("cmd_train: run directory artifacts") {
  const auto dir = test::scratch_dir("train_smoke");
  TrainCommandOptions options;
  options.config = smoke_config(dir / "run");
  const TrainOutcome outcome = cmd_train(options);
  CHECK(std::filesystem::exists(outcome.run_dir / "manifest.json"));
  CHECK(std::filesystem::exists(outcome.run_dir / "energy_trace.csv"));
  CHECK(std::filesystem::exists(outcome.run_dir / "acceptance_log.csv"));
  CHECK(std::filesystem::exists(outcome.run_dir / "checkpoint_final.json"));
  CHECK(std::filesystem::exists(outcome.run_dir / "checkpoint_final.bin"));
  CHECK(std::filesystem::exists(outcome.run_dir / "observables.json"));
  CHECK(std::filesystem::exists(outcome.run_dir / "observables.csv"));

  json manifest;
  std::ifstream(outcome.run_dir / "manifest.json") >> manifest;
  CHECK(manifest.at("coupling").at("distance_convention").get<std::string>().find("ring") !=
        std::string::npos);
  CHECK(manifest.at("coupling").contains("kac_literal_1_plus_harmonic_N"));
  CHECK(manifest.at("coupling").contains("kac_literal_1_plus_harmonic_N_minus_1"));
  CHECK(manifest.at("ansatz").at("parameter_count").get<int>() ==
        6 * 24 + 24);  // density-1 RBM at N = 6
  CHECK(manifest.at("config").at("seed").get<int>() == 42);

  // energy trace has a header plus one row per iteration
  const std::string trace = slurp(outcome.run_dir / "energy_trace.csv");
  int lines = 0;
  for (char c : trace) lines += c == '\n';
  CHECK(lines == 1 + 4);
}

TEST_CASE("cmd_train: identical seeds give identical traces") {
  const auto dir = test::scratch_dir("train_det");
  TrainCommandOptions options_a;
  options_a.config = smoke_config(dir / "a");
  TrainCommandOptions options_b;
  options_b.config = smoke_config(dir / "b");
  const auto a = cmd_train(options_a);
  const auto b = cmd_train(options_b);
  CHECK(slurp(a.run_dir / "energy_trace.csv") == slurp(b.run_dir / "energy_trace.csv"));
  CHECK(slurp(a.run_dir / "checkpoint_final.bin") == slurp(b.run_dir / "checkpoint_final.bin"));
}

TEST_CASE("cmd_train: resuming from a checkpoint is reproducible") {
  const auto dir = test::scratch_dir("train_resume");
  TrainCommandOptions base;
  base.config = smoke_config(dir / "base");
  const auto first = cmd_train(base);

  TrainCommandOptions resume_a;
  resume_a.config = smoke_config(dir / "resume_a");
  resume_a.config.optimizer.max_iterations = 2;
  resume_a.resume_checkpoint = first.run_dir / "checkpoint_final";
  TrainCommandOptions resume_b;
  resume_b.config = smoke_config(dir / "resume_b");
  resume_b.config.optimizer.max_iterations = 2;
  resume_b.resume_checkpoint = first.run_dir / "checkpoint_final";
  const auto ra = cmd_train(resume_a);
  const auto rb = cmd_train(resume_b);
  REQUIRE(!ra.result.trace.empty());
  CHECK(ra.result.trace[0].energy == rb.result.trace[0].energy);
  CHECK(slurp(ra.run_dir / "energy_trace.csv") == slurp(rb.run_dir / "energy_trace.csv"));
}

TEST_CASE("cmd_sweep: 2x2 grid produces four rows and a heatmap") {
  const auto dir = test::scratch_dir("sweep_smoke");
  SweepOptions options;
  options.base = smoke_config(dir / "sweep");
  options.base.model.n_sites = 8;
  options.base.optimizer.max_iterations = 3;
  options.j_grid = {-1.0, 1.0};
  options.alpha_grid = {1.5, 2.5};
  const auto out_dir = cmd_sweep(options);
  const std::string csv = slurp(out_dir / "sweep.csv");
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 4);
  CHECK(std::filesystem::exists(out_dir / "sweep_m2.svg"));
  // automatic wavevector selection: J < 0 measures q = 0, J > 0 measures q = pi
  json obs_neg;
  std::ifstream(out_dir / "point_a1.5_J-1/observables.json") >> obs_neg;
  CHECK(obs_neg.at("q").get<double>() == 0.0);
  json obs_pos;
  std::ifstream(out_dir / "point_a1.5_J1/observables.json") >> obs_pos;
  CHECK(obs_pos.at("q").get<double>() > 3.0);
}

TEST_CASE("cmd_exact: free spin chain and cache reuse") {
  const auto dir = test::scratch_dir("exact_cmd");
  ExactOptions options;
  options.model.n_sites = 1;
  options.model.coupling = 0.0;
  options.model.alpha = 2.0;
  options.output = dir / "report.json";
  options.cache_dir = dir / "cache";
  const json report = cmd_exact(options);
  CHECK(report.at("ground_energy").get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::filesystem::exists(options.output));

  // second call must hit the cache (same content)
  const json again = cmd_exact(options);
  CHECK(again.at("ground_energy") == report.at("ground_energy"));
  int cache_files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(options.cache_dir)) {
    (void)entry;
    ++cache_files;
  }
  CHECK(cache_files == 1);
}

TEST_CASE("cmd_exact: checkpoint comparison reports the relative error") {
  const auto dir = test::scratch_dir("exact_compare");
  TrainCommandOptions train_options;
  train_options.config = smoke_config(dir / "run");
  train_options.config.optimizer.max_iterations = 30;
  train_options.config.model.coupling = 0.0;
  const auto outcome = cmd_train(train_options);

  ExactOptions options;
  options.model = train_options.config.model;
  options.checkpoint_stem = outcome.run_dir / "checkpoint_final";
  const json report = cmd_exact(options);
  CHECK(report.contains("checkpoint"));
  const double err = report.at("checkpoint").at("relative_energy_error").get<double>();
  CHECK(std::isfinite(err));
  CHECK(err < 0.05);  // J = 0 trains fast even in a smoke run
  CHECK(report.at("checkpoint").at("energy").get<double>() >=
        report.at("ground_energy").get<double>() - 1e-9);
}

TEST_CASE("cmd_fssa: fit report with derived critical columns") {
  const auto dir = test::scratch_dir("fssa_cmd");
  const auto csv_path = dir / "data.csv";
  {
    std::ofstream out(csv_path);
    out << "N,J,value,error\n";
    auto rng = make_stream(3, 0);
    for (double n : {50.0, 100.0, 150.0}) {
      for (int k = 0; k < 25; ++k) {
        const double j = 0.8 + 0.4 * k / 24.0;
        const double x = std::pow(n, 1.0) * (j - 1.0);
        const double value =
            std::pow(n, -0.25) * (1.0 / (1.0 + x * x)) * (1.0 + 0.01 * standard_normal(rng));
        out << n << ',' << j << ',' << value << ',' << 0.01 * value << '\n';
      }
    }
  }
  FssaCommandOptions options;
  options.input_csv = csv_path;
  options.output_dir = dir / "out";
  options.fit.j_c = 0.9;
  options.fit.nu = 1.2;
  options.fit.beta = 0.2;
  options.alpha = 6.0;
  const CriticalFit fit = cmd_fssa(options);
  CHECK(std::abs(fit.j_c - 1.0) < 0.02);
  json report;
  std::ifstream(dir / "out" / "critical_fit.json") >> report;
  CHECK(report.contains("h_tilde_c"));
  CHECK(report.contains("theta_c"));
  CHECK(report.contains("j_tilde_c"));
  CHECK(std::filesystem::exists(dir / "out" / "collapse.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "collapse.svg"));
}

TEST_CASE("cmd_fssa: malformed CSV names the line") {
  const auto dir = test::scratch_dir("fssa_bad");
  const auto csv_path = dir / "bad.csv";
  {
    std::ofstream out(csv_path);
    out << "N,J,value,error\n8,1.0,0.3,xyz\n";
  }
  FssaCommandOptions options;
  options.input_csv = csv_path;
  options.output_dir = dir / "out";
  try {
    (void)cmd_fssa(options);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("cmd_observe: measures a stored checkpoint") {
  const auto dir = test::scratch_dir("observe_cmd");
  TrainCommandOptions train_options;
  train_options.config = smoke_config(dir / "run");
  const auto outcome = cmd_train(train_options);

  ObserveOptions options;
  options.checkpoint_stem = outcome.run_dir / "checkpoint_final";
  options.output = dir / "obs" / "observe.json";
  options.seed = 5;
  const json obs = cmd_observe(options);
  CHECK(obs.contains("m2"));
  CHECK(obs.contains("s2"));
  CHECK(obs.contains("v_score"));
  CHECK(std::filesystem::exists(dir / "obs" / "observables.csv"));
  const double m2 = obs.at("m2").get<double>();
  CHECK(m2 >= 0.0);
  CHECK(m2 <= 1.0);
}
