#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "lrvmc/ansatz.hpp"
#include "lrvmc/ising.hpp"
#include "lrvmc/sampler.hpp"

namespace lrvmc {

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear warm-up to the peak, then exponential decay.
struct LearningRateSchedule {
  double initial = 0.1;
  double peak = 2.0;
  int warmup_iterations = 75;
  double decay_ratio = 0.995;

  void validate() const;
  double at(int iteration) const;
};

// Linear interpolation from start to end over the run.
struct DiagonalShiftSchedule {
  double start = 1e-2;
  double end = 1e-4;
  int total_iterations = 250;

  void validate() const;
  double at(int iteration) const;
};

// Covariance S = <O O^T> - <O><O>^T and force F = <E O> - <E><O>, held in
// centered form so large parameter counts avoid materializing S.
struct SrStatistics {
  Eigen::MatrixXd centered_derivatives;  // P x M, columns O(s_m) - <O>
  Eigen::VectorXd mean_derivatives;
  Eigen::VectorXd force;
  double mean_energy = 0.0;
  double energy_variance = 0.0;  // unbiased sample variance of E_loc
  Eigen::Index sample_count = 0;

  Eigen::MatrixXd covariance() const;
  // (S + shift I) v without forming S.
  Eigen::VectorXd apply_covariance(const Eigen::VectorXd& v, double shift) const;
};

// derivatives holds one O(s) column per sample. Means use compensated
// accumulation; S and F come from centered products (PSD by construction).
// Non-finite inputs are rejected with the offending sample index.
SrStatistics accumulate_sr_statistics(const Eigen::MatrixXd& derivatives,
                                      const Eigen::VectorXd& local_energies);

struct SrSolveInfo {
  double residual = 0.0;  // ||(S + shift I) delta - F|| / ||F||
  double shift_used = 0.0;
  int cg_iterations = 0;
  bool dense = true;
};

// Solves (S + shift I) delta = F and returns params - lr * delta. Dense LLT up
// to dense_threshold parameters, conjugate gradients on the centered factors
// above. A failed factorization retries once with a 10x shift, then throws.
Eigen::VectorXd sr_update(const Eigen::VectorXd& params, const SrStatistics& stats,
                          double learning_rate, double shift,
                          Eigen::Index dense_threshold = 3000, SrSolveInfo* info = nullptr);

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double energy_variance = 0.0;
  double v_score = 0.0;
  double learning_rate = 0.0;
  double diagonal_shift = 0.0;
  double acceptance_local = 0.0;
  double acceptance_global = 0.0;
  double solver_residual = 0.0;
};

struct TrainOptions {
  int max_iterations = 250;
  LearningRateSchedule learning_rate{};
  DiagonalShiftSchedule diagonal_shift{1e-2, 1e-4, 0};  // 0: span max_iterations
  int table_threshold = 12;  // tabulate log psi over the full basis when N <= this
  Eigen::Index dense_solver_threshold = 3000;
  double budget_seconds = 0.0;       // 0 = unlimited
  bool budget_wall_clock = false;    // default: process CPU time
  int checkpoint_every = 0;          // 0 = never
  std::function<void(int, const Eigen::VectorXd&)> checkpoint_hook;
  std::ostream* trace_stream = nullptr;       // per-iteration CSV rows
  std::ostream* acceptance_stream = nullptr;  // per-iteration per-move-type rows
  bool verbose = false;
};

struct TrainResult {
  Eigen::VectorXd parameters;
  std::vector<IterationRecord> trace;
  int iterations_completed = 0;
  bool budget_exhausted = false;
};

const char* train_trace_header();
const char* acceptance_log_header();
void write_trace_row(std::ostream& out, const IterationRecord& rec);

// SR training loop: sample, local energies and log-derivatives, SR update.
// Chains persist across updates (cached amplitudes are refreshed); a
// non-finite energy aborts via NumericalFailure after checkpointing the last
// good parameters.
TrainResult train(const TransverseFieldIsingModel& model, const Ansatz& ansatz,
                  Eigen::VectorXd theta, const SamplerConfig& sampler_config,
                  const TrainOptions& options);

}  // namespace lrvmc
