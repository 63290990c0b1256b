#pragma once

#include <Eigen/Dense>

#include "lrvmc/ising.hpp"

namespace lrvmc {

// Basis convention: state index b has spin i = +1 when bit i of b is clear, so
// index 0 is the all-up state.
struct ExactSolution {
  int n_sites = 0;
  double ground_energy = 0.0;
  double gap = 0.0;                // E1 - E0
  Eigen::VectorXd ground_vector;   // normalized, uniform sign (Perron-Frobenius)
};

enum class EigenMethod { kAuto, kDense, kLanczos };

// Dense 2^N x 2^N symmetric matrix; diagonal from diagonal_energy, -h_x
// between Hamming-distance-1 configurations. Rejects N > 14 (memory guard).
Eigen::MatrixXd build_dense_hamiltonian(const TransverseFieldIsingModel& model);

// Diagonal entries over the full basis (2^N values).
Eigen::VectorXd diagonal_over_basis(const TransverseFieldIsingModel& model);

// Smallest eigenpair plus the gap. kAuto uses the dense solver for N <= 10 and
// matrix-free Lanczos (full reorthogonalization) above; N <= 14 throughout.
ExactSolution ground_state(const TransverseFieldIsingModel& model,
                           EigenMethod method = EigenMethod::kAuto);

struct ExactObservables {
  double m2 = 0.0;  // <m_s(q)^2>
  double s2 = 0.0;  // Renyi-2 of the first-half partition, base 2
};

// <m^2> by direct weighted sum; S2 = -log2 Tr rho_A^2 via dense partial trace.
// partition_size < 0 means N/2.
ExactObservables exact_observables(const ExactSolution& solution, double q,
                                   int partition_size = -1);

// Exact variational quantities of an arbitrary real log-amplitude over the full
// basis: energy, variance, and <m^2> of the normalized state.
struct ExactVariational {
  double energy = 0.0;
  double variance = 0.0;  // <H^2> - <H>^2
  double m2 = 0.0;
};
ExactVariational exact_variational(const TransverseFieldIsingModel& model,
                                   const BatchedLogPsiFn& log_psi_fn, double q);

// Log-amplitude callbacks backed by the exact ground vector.
LogPsiFn exact_log_psi(const ExactSolution& solution);
BatchedLogPsiFn exact_log_psi_batched(const ExactSolution& solution);

}  // namespace lrvmc
