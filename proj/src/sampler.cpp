#include "lrvmc/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrvmc {

void SamplerConfig::validate() const {
  if (n_chains < 1) throw std::invalid_argument("sampler: n_chains must be >= 1");
  if (samples_per_iteration < 1) {
    throw std::invalid_argument("sampler: samples_per_iteration must be >= 1");
  }
  if (samples_per_iteration % n_chains != 0) {
    throw std::invalid_argument(
        "sampler: samples_per_iteration must be divisible by n_chains");
  }
  if (!(local_move_weight > 0.0) || !(global_move_weight > 0.0)) {
    throw std::invalid_argument("sampler: move weights must be positive");
  }
}

void SamplerState::refresh_log_psi(const BatchedLogPsiFn& log_psi_fn) {
  log_psi = log_psi_fn(configurations);
}

bool SamplerState::cache_consistent(const BatchedLogPsiFn& log_psi_fn, double tol) const {
  const Eigen::VectorXd fresh = log_psi_fn(configurations);
  return (fresh - log_psi).cwiseAbs().maxCoeff() <= tol;
}

SamplerState make_sampler_state(const SamplerConfig& config, int n_sites,
                                const BatchedLogPsiFn& log_psi_fn) {
  config.validate();
  SamplerState state;
  state.configurations.resize(n_sites, config.n_chains);
  state.rng.reserve(config.n_chains);
  for (int c = 0; c < config.n_chains; ++c) {
    state.rng.push_back(make_stream(config.seed, static_cast<std::uint64_t>(c)));
    state.configurations.col(c) = random_configuration(n_sites, state.rng[c]);
  }
  state.refresh_log_psi(log_psi_fn);
  return state;
}

SamplerState initialize_sampler(const SamplerConfig& config, int n_sites,
                                const BatchedLogPsiFn& log_psi_fn) {
  SamplerState state = make_sampler_state(config, n_sites, log_psi_fn);
  const int burn = config.effective_burn_in(n_sites);
  for (int step = 0; step < burn; ++step) metropolis_step(state, log_psi_fn, config);
  return state;
}

SpinVector propose_local_flip(const SpinVector& s, std::mt19937_64& rng) {
  SpinVector candidate = s;
  const int site = uniform_index(rng, static_cast<int>(s.size()));
  candidate[site] = -candidate[site];
  return candidate;
}

SpinVector propose_global_inversion(const SpinVector& s) { return -s; }

namespace {

// Shared accept rule: returns true when the candidate is kept. Draws exactly
// one uniform for the accept decision.
bool accept_candidate(double log_psi_current, double log_psi_candidate, std::mt19937_64& rng,
                      std::int64_t& nonfinite_rejections) {
  const double u = uniform01(rng);
  if (std::isnan(log_psi_candidate) ||
      log_psi_candidate == std::numeric_limits<double>::infinity()) {
    ++nonfinite_rejections;
    return false;
  }
  const double log_ratio = 2.0 * (log_psi_candidate - log_psi_current);
  if (log_ratio >= 0.0) return true;
  return u < std::exp(log_ratio);
}

}  // namespace

void metropolis_step(SamplerState& state, const BatchedLogPsiFn& log_psi_fn,
                     const SamplerConfig& config) {
  const int n_chains = state.n_chains();
  const int n_sites = state.n_sites();
  const double p_local = config.local_probability();

  SpinBatch candidates(n_sites, n_chains);
  std::vector<MoveType> moves(n_chains);
  std::vector<int> sites(n_chains, -1);
  for (int c = 0; c < n_chains; ++c) {
    const double u = uniform01(state.rng[c]);
    if (u < p_local) {
      moves[c] = MoveType::kLocalFlip;
      sites[c] = uniform_index(state.rng[c], n_sites);
      candidates.col(c) = state.configurations.col(c);
      candidates(sites[c], c) = -candidates(sites[c], c);
    } else {
      moves[c] = MoveType::kGlobalInversion;
      candidates.col(c) = -state.configurations.col(c);
    }
  }
  const Eigen::VectorXd candidate_log_psi = log_psi_fn(candidates);
  for (int c = 0; c < n_chains; ++c) {
    MoveStats& ms = state.stats[static_cast<int>(moves[c])];
    ++ms.proposed;
    if (accept_candidate(state.log_psi[c], candidate_log_psi[c], state.rng[c],
                         state.nonfinite_rejections)) {
      ++ms.accepted;
      state.configurations.col(c) = candidates.col(c);
      state.log_psi[c] = candidate_log_psi[c];
    }
  }
}

void metropolis_step_chain(SpinVector& s, double& log_psi_value, std::mt19937_64& rng,
                           const LogPsiFn& log_psi_fn, const SamplerConfig& config,
                           std::array<MoveStats, 2>& stats) {
  const double u = uniform01(rng);
  SpinVector candidate;
  MoveType move;
  if (u < config.local_probability()) {
    move = MoveType::kLocalFlip;
    candidate = propose_local_flip(s, rng);
  } else {
    move = MoveType::kGlobalInversion;
    candidate = propose_global_inversion(s);
  }
  MoveStats& ms = stats[static_cast<int>(move)];
  ++ms.proposed;
  const double candidate_log_psi = log_psi_fn(candidate);
  std::int64_t nonfinite = 0;
  if (accept_candidate(log_psi_value, candidate_log_psi, rng, nonfinite)) {
    ++ms.accepted;
    s = candidate;
    log_psi_value = candidate_log_psi;
  }
}

SampleBatch sample_batch(SamplerState& state, const SamplerConfig& config,
                         const BatchedLogPsiFn& log_psi_fn) {
  config.validate();
  const int n_chains = state.n_chains();
  const int rounds = config.samples_per_iteration / n_chains;
  const int spacing = config.effective_decorrelation(state.n_sites());

  SampleBatch batch;
  batch.configurations.resize(state.n_sites(), config.samples_per_iteration);
  batch.log_psi.resize(config.samples_per_iteration);
  for (int r = 0; r < rounds; ++r) {
    for (int step = 0; step < spacing; ++step) metropolis_step(state, log_psi_fn, config);
    batch.configurations.middleCols(r * n_chains, n_chains) = state.configurations;
    batch.log_psi.segment(r * n_chains, n_chains) = state.log_psi;
  }
  return batch;
}

}  // namespace lrvmc
