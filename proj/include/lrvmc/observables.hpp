#pragma once

#include <Eigen/Dense>

#include "lrvmc/spin.hpp"

namespace lrvmc {

// Generalized staggered magnetization m_s(q) = (1/N) sum_j s_j cos(q j) with
// sites indexed from 0. Only q = 0 and q = pi are supported.
double staggered_magnetization(const SpinVector& s, double q);

// q = 0 for ferromagnetic coupling (J < 0), q = pi for antiferromagnetic.
double wavevector_for_coupling(double coupling_strength);

struct MagnetizationResult {
  double q = 0.0;
  double m2_mean = 0.0;
  double std_error = 0.0;
  Eigen::Index sample_count = 0;
};

// Mean of m_s(q)^2 over the samples with a batch-means standard error.
MagnetizationResult m_squared_estimator(const SpinBatch& samples, double q);

struct RenyiResult {
  double s2 = 0.0;          // base-2 Renyi-2 entropy of the first-half partition
  double std_error = 0.0;   // jackknife over pairs
  double swap_mean = 0.0;
  Eigen::Index pair_count = 0;
  bool undersampled = false;
};

// Two-copy swap estimator: pairs (a_k, b_k) from two independent |psi|^2
// streams, swap ratio psi(aA,b~A) psi(bA,a~A) / (psi(a) psi(b)), and
// S2 = -log2<swap>. The estimator is symmetric in the two streams.
RenyiResult renyi2_swap_estimator(const SpinBatch& stream_a, const SpinBatch& stream_b,
                                  const BatchedLogPsiFn& log_psi_fn);

// Splits one batch into the pairs (k, k + half) and runs the swap estimator.
RenyiResult renyi2_from_batch(const SpinBatch& samples, const BatchedLogPsiFn& log_psi_fn);

struct VScoreResult {
  double value = 0.0;
  double mean_energy = 0.0;
  double energy_variance = 0.0;
  bool defined = true;  // false when the mean energy is within noise of zero
};

// V-score = N var(E_loc) / mean(E_loc)^2 from the local-energy stream.
VScoreResult v_score(const Eigen::VectorXd& local_energies, int n_sites);

}  // namespace lrvmc
