#pragma once

#include <filesystem>
#include <json.hpp>
#include <memory>
#include <string>

#include "lrvmc/ansatz.hpp"
#include "lrvmc/ising.hpp"
#include "lrvmc/sampler.hpp"
#include "lrvmc/sr.hpp"

namespace lrvmc {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  int n_sites = 50;
  double alpha = 2.5;
  double coupling = -1.0;  // J in units of h_x
  double self_term = 1.0;
  double field = 1.0;
  bool kac_on = true;
  bool include_self_term = true;
};

struct VitConfig {
  int token_dim = -1;  // -1: N/10 when N is a multiple of 10, else 1
  int embed_dim = 14;
  int heads = 2;
  int core_mlp_layers = 3;
  std::vector<int> postprocessor_dims = {5};
};

struct RbmConfig {
  int density = 1;
  int hidden_width = -1;  // -1: derived from the density
};

struct MlpConfig {
  std::vector<int> layer_dims;  // empty: {2N, 1}
};

struct AnsatzConfig {
  std::string type = "vit";  // vit | rbm | mlp
  VitConfig vit;
  RbmConfig rbm;
  MlpConfig mlp;
};

struct OptimizerConfig {
  int max_iterations = 250;
  LearningRateSchedule learning_rate{};
  DiagonalShiftSchedule diagonal_shift{1e-2, 1e-4, 0};  // 0 spans max_iterations
  int checkpoint_every = 0;
  int table_threshold = 12;
  Eigen::Index dense_solver_threshold = 3000;
};

struct RunConfiguration {
  ModelConfig model;
  AnsatzConfig ansatz;
  SamplerConfig sampler;
  OptimizerConfig optimizer;
  std::string output_dir = "runs/run";
  std::uint64_t seed = 1;
};

// Strict parse: unknown keys are rejected, types and ranges checked.
RunConfiguration parse_run_configuration(const nlohmann::json& j);
RunConfiguration load_run_configuration(const std::filesystem::path& file);

// Full echo including defaulted values; parses back to the same configuration.
nlohmann::json run_configuration_to_json(const RunConfiguration& config);

TransverseFieldIsingModel make_model(const ModelConfig& config);
std::unique_ptr<Ansatz> make_ansatz(const AnsatzConfig& config, int n_sites);

// Coupling block written into every run manifest: alpha, J, b, N, the actual
// row-sum Kac factor, the literal 1 + H_N / 1 + H_{N-1} values, flags, and the
// distance convention tag.
nlohmann::json coupling_metadata(const TransverseFieldIsingModel& model);

// Ansatz block for manifests: type, parameter count, per-slice breakdown.
nlohmann::json ansatz_metadata(const Ansatz& ansatz);

}  // namespace lrvmc
