#include "lrvmc/config.hpp"

#include <fstream>
#include <set>

#include "lrvmc/mlp.hpp"
#include "lrvmc/rbm.hpp"
#include "lrvmc/vit.hpp"

namespace lrvmc {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& context,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(context + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

void parse_model(const json& j, ModelConfig& m) {
  check_keys(j, "model", {"n_sites", "alpha", "coupling", "self_term", "field", "kac_on",
                          "include_self_term"});
  read(j, "n_sites", m.n_sites);
  read(j, "alpha", m.alpha);
  read(j, "coupling", m.coupling);
  read(j, "self_term", m.self_term);
  read(j, "field", m.field);
  read(j, "kac_on", m.kac_on);
  read(j, "include_self_term", m.include_self_term);
  if (m.n_sites < 1) throw ConfigError("model: n_sites must be >= 1");
  if (m.alpha < 0.0) throw ConfigError("model: alpha must be >= 0");
  if (!(m.field > 0.0)) throw ConfigError("model: field must be > 0");
}

void parse_ansatz(const json& j, AnsatzConfig& a) {
  check_keys(j, "ansatz", {"type", "vit", "rbm", "mlp"});
  read(j, "type", a.type);
  if (a.type != "vit" && a.type != "rbm" && a.type != "mlp") {
    throw ConfigError("ansatz: type must be vit, rbm, or mlp");
  }
  if (j.contains("vit")) {
    const json& v = j.at("vit");
    check_keys(v, "ansatz.vit",
               {"token_dim", "embed_dim", "heads", "core_mlp_layers", "postprocessor_dims"});
    read(v, "token_dim", a.vit.token_dim);
    read(v, "embed_dim", a.vit.embed_dim);
    read(v, "heads", a.vit.heads);
    read(v, "core_mlp_layers", a.vit.core_mlp_layers);
    read(v, "postprocessor_dims", a.vit.postprocessor_dims);
  }
  if (j.contains("rbm")) {
    const json& r = j.at("rbm");
    check_keys(r, "ansatz.rbm", {"density", "hidden_width"});
    read(r, "density", a.rbm.density);
    read(r, "hidden_width", a.rbm.hidden_width);
  }
  if (j.contains("mlp")) {
    const json& m = j.at("mlp");
    check_keys(m, "ansatz.mlp", {"layer_dims"});
    read(m, "layer_dims", a.mlp.layer_dims);
  }
}

void parse_sampler(const json& j, SamplerConfig& s) {
  check_keys(j, "sampler", {"n_chains", "samples_per_iteration", "burn_in_steps",
                            "decorrelation_steps", "local_move_weight", "global_move_weight"});
  read(j, "n_chains", s.n_chains);
  read(j, "samples_per_iteration", s.samples_per_iteration);
  read(j, "burn_in_steps", s.burn_in_steps);
  read(j, "decorrelation_steps", s.decorrelation_steps);
  read(j, "local_move_weight", s.local_move_weight);
  read(j, "global_move_weight", s.global_move_weight);
  s.validate();
}

void parse_optimizer(const json& j, OptimizerConfig& o) {
  check_keys(j, "optimizer",
             {"max_iterations", "learning_rate", "diagonal_shift", "checkpoint_every",
              "table_threshold", "dense_solver_threshold"});
  read(j, "max_iterations", o.max_iterations);
  if (j.contains("learning_rate")) {
    const json& lr = j.at("learning_rate");
    check_keys(lr, "optimizer.learning_rate",
               {"initial", "peak", "warmup_iterations", "decay_ratio"});
    read(lr, "initial", o.learning_rate.initial);
    read(lr, "peak", o.learning_rate.peak);
    read(lr, "warmup_iterations", o.learning_rate.warmup_iterations);
    read(lr, "decay_ratio", o.learning_rate.decay_ratio);
  }
  if (j.contains("diagonal_shift")) {
    const json& ds = j.at("diagonal_shift");
    check_keys(ds, "optimizer.diagonal_shift", {"start", "end"});
    read(ds, "start", o.diagonal_shift.start);
    read(ds, "end", o.diagonal_shift.end);
  }
  read(j, "checkpoint_every", o.checkpoint_every);
  read(j, "table_threshold", o.table_threshold);
  long long dense = o.dense_solver_threshold;
  read(j, "dense_solver_threshold", dense);
  o.dense_solver_threshold = dense;
  if (o.max_iterations < 1) throw ConfigError("optimizer: max_iterations must be >= 1");
  o.learning_rate.validate();
  o.diagonal_shift.validate();
}

}  // namespace

RunConfiguration parse_run_configuration(const nlohmann::json& j) {
  check_keys(j, "config", {"model", "ansatz", "sampler", "optimizer", "output_dir", "seed"});
  RunConfiguration config;
  if (j.contains("model")) parse_model(j.at("model"), config.model);
  if (j.contains("ansatz")) parse_ansatz(j.at("ansatz"), config.ansatz);
  if (j.contains("sampler")) parse_sampler(j.at("sampler"), config.sampler);
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), config.optimizer);
  read(j, "output_dir", config.output_dir);
  read(j, "seed", config.seed);
  return config;
}

RunConfiguration load_run_configuration(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in " + file.string() + ": " + e.what());
  }
  return parse_run_configuration(j);
}

nlohmann::json run_configuration_to_json(const RunConfiguration& c) {
  nlohmann::json j;
  j["model"] = {{"n_sites", c.model.n_sites},
                {"alpha", c.model.alpha},
                {"coupling", c.model.coupling},
                {"self_term", c.model.self_term},
                {"field", c.model.field},
                {"kac_on", c.model.kac_on},
                {"include_self_term", c.model.include_self_term}};
  j["ansatz"] = {{"type", c.ansatz.type},
                 {"vit",
                  {{"token_dim", c.ansatz.vit.token_dim},
                   {"embed_dim", c.ansatz.vit.embed_dim},
                   {"heads", c.ansatz.vit.heads},
                   {"core_mlp_layers", c.ansatz.vit.core_mlp_layers},
                   {"postprocessor_dims", c.ansatz.vit.postprocessor_dims}}},
                 {"rbm", {{"density", c.ansatz.rbm.density}, {"hidden_width", c.ansatz.rbm.hidden_width}}},
                 {"mlp", {{"layer_dims", c.ansatz.mlp.layer_dims}}}};
  j["sampler"] = {{"n_chains", c.sampler.n_chains},
                  {"samples_per_iteration", c.sampler.samples_per_iteration},
                  {"burn_in_steps", c.sampler.burn_in_steps},
                  {"decorrelation_steps", c.sampler.decorrelation_steps},
                  {"local_move_weight", c.sampler.local_move_weight},
                  {"global_move_weight", c.sampler.global_move_weight}};
  j["optimizer"] = {{"max_iterations", c.optimizer.max_iterations},
                    {"learning_rate",
                     {{"initial", c.optimizer.learning_rate.initial},
                      {"peak", c.optimizer.learning_rate.peak},
                      {"warmup_iterations", c.optimizer.learning_rate.warmup_iterations},
                      {"decay_ratio", c.optimizer.learning_rate.decay_ratio}}},
                    {"diagonal_shift",
                     {{"start", c.optimizer.diagonal_shift.start},
                      {"end", c.optimizer.diagonal_shift.end}}},
                    {"checkpoint_every", c.optimizer.checkpoint_every},
                    {"table_threshold", c.optimizer.table_threshold},
                    {"dense_solver_threshold", c.optimizer.dense_solver_threshold}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

TransverseFieldIsingModel make_model(const ModelConfig& config) {
  return make_ising_model(config.alpha, config.coupling, config.self_term, config.n_sites,
                          config.kac_on, config.field, config.include_self_term);
}

std::unique_ptr<Ansatz> make_ansatz(const AnsatzConfig& config, int n_sites) {
  if (config.type == "vit") {
    ViTHyperparameters hp = ViTHyperparameters::table_defaults(n_sites);
    if (config.vit.token_dim > 0) hp.token_dim = config.vit.token_dim;
    hp.embed_dim = config.vit.embed_dim;
    hp.heads = config.vit.heads;
    hp.core_mlp_layers = config.vit.core_mlp_layers;
    hp.postprocessor_dims = config.vit.postprocessor_dims;
    return std::make_unique<ViTAnsatz>(hp);
  }
  if (config.type == "rbm") {
    const int width = config.rbm.hidden_width > 0
                          ? config.rbm.hidden_width
                          : rbm_width_for_density(n_sites, config.rbm.density);
    return std::make_unique<RbmAnsatz>(n_sites, width);
  }
  if (config.type == "mlp") {
    std::vector<int> dims = config.mlp.layer_dims;
    if (dims.empty()) dims = {2 * n_sites, 1};
    return std::make_unique<FfnnAnsatz>(n_sites, dims);
  }
  throw ConfigError("ansatz: unknown type '" + config.type + "'");
}

nlohmann::json coupling_metadata(const TransverseFieldIsingModel& model) {
  const CouplingModel& c = model.coupling;
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["coupling"] = c.coupling_strength;
  j["self_term"] = c.self_term;
  j["n_sites"] = c.size;
  j["field"] = model.field;
  j["kac_on"] = c.kac_on;
  j["include_self_term"] = model.include_self_term;
  j["kac_factor_row_sum"] = c.kac_factor;
  // Literal generalized-harmonic-number variants of the Kac factor; the row
  // sum above is what normalizes the energies.
  j["kac_literal_1_plus_harmonic_N"] = c.self_term + harmonic_number(c.size, c.alpha);
  j["kac_literal_1_plus_harmonic_N_minus_1"] =
      c.size > 1 ? c.self_term + harmonic_number(c.size - 1, c.alpha) : c.self_term;
  j["distance_convention"] = "ring-offset min(r, N-r)";
  return j;
}

nlohmann::json ansatz_metadata(const Ansatz& ansatz) {
  nlohmann::json j;
  j["type"] = ansatz.kind();
  j["n_sites"] = ansatz.n_sites();
  j["parameter_count"] = ansatz.parameter_count();
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& s : ansatz.layout().slices()) {
    slices.push_back({{"name", s.name}, {"offset", s.offset}, {"size", s.size}});
  }
  j["layout"] = slices;
  return j;
}

}  // namespace lrvmc
