#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "lrvmc/ising.hpp"
#include "lrvmc/spin.hpp"

namespace lrvmc {

enum class MoveType { kLocalFlip = 0, kGlobalInversion = 1 };

struct MoveStats {
  std::int64_t proposed = 0;
  std::int64_t accepted = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct SamplerConfig {
  int n_chains = 1024;
  int samples_per_iteration = 4096;
  int burn_in_steps = -1;        // -1: 10 * N at initialization
  int decorrelation_steps = -1;  // -1: N steps (one local-sweep equivalent)
  double local_move_weight = 3.0;
  double global_move_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  int effective_burn_in(int n_sites) const {
    return burn_in_steps < 0 ? 10 * n_sites : burn_in_steps;
  }
  int effective_decorrelation(int n_sites) const {
    return decorrelation_steps < 0 ? n_sites : decorrelation_steps;
  }
  double local_probability() const {
    return local_move_weight / (local_move_weight + global_move_weight);
  }
};

// Chains evolve in lockstep; each chain owns a private RNG stream keyed by its
// id, so the sample stream is reproducible regardless of scheduling.
struct SamplerState {
  SpinBatch configurations;  // N x n_chains
  Eigen::VectorXd log_psi;   // cached, one per chain
  std::vector<std::mt19937_64> rng;
  std::array<MoveStats, 2> stats;
  std::int64_t nonfinite_rejections = 0;

  int n_chains() const { return static_cast<int>(configurations.cols()); }
  int n_sites() const { return static_cast<int>(configurations.rows()); }

  // Re-evaluates the cached amplitudes, e.g. after a parameter update.
  void refresh_log_psi(const BatchedLogPsiFn& log_psi_fn);
  // Debug check: cached log psi must match a fresh evaluation.
  bool cache_consistent(const BatchedLogPsiFn& log_psi_fn, double tol = 1e-12) const;
};

// Random chain initialization; burn-in is run by initialize_sampler.
SamplerState make_sampler_state(const SamplerConfig& config, int n_sites,
                                const BatchedLogPsiFn& log_psi_fn);

// make_sampler_state + burn-in sweeps.
SamplerState initialize_sampler(const SamplerConfig& config, int n_sites,
                                const BatchedLogPsiFn& log_psi_fn);

// One uniformly chosen site negated.
SpinVector propose_local_flip(const SpinVector& s, std::mt19937_64& rng);

// All spins negated (magnetization inversion; an involution).
SpinVector propose_global_inversion(const SpinVector& s);

// One Metropolis step for every chain: per chain, draw the move type
// (local with probability local/(local+global)), build the candidate, accept
// with min(1, exp(2 * (log_psi' - log_psi))). Candidates are evaluated in one
// batched call. Non-finite candidate amplitudes are rejected and flagged.
void metropolis_step(SamplerState& state, const BatchedLogPsiFn& log_psi_fn,
                     const SamplerConfig& config);

// Single-chain step used by small-system tests; same draw order per chain.
void metropolis_step_chain(SpinVector& s, double& log_psi_value, std::mt19937_64& rng,
                           const LogPsiFn& log_psi_fn, const SamplerConfig& config,
                           std::array<MoveStats, 2>& stats);

struct SampleBatch {
  SpinBatch configurations;  // N x samples
  Eigen::VectorXd log_psi;
};

// Collects samples_per_iteration configurations round-robin across chains,
// spacing harvests by the decorrelation step count.
SampleBatch sample_batch(SamplerState& state, const SamplerConfig& config,
                         const BatchedLogPsiFn& log_psi_fn);

}  // namespace lrvmc
