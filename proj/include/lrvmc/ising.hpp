#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

#include "lrvmc/coupling.hpp"
#include "lrvmc/spin.hpp"

namespace lrvmc {

// H = sum_{i != j} J_ij sigma^z_i sigma^z_j - h_x sum_i sigma^x_i, plus the
// constant J*b*N/kac from the i = j self term (droppable via include_self_term).
struct TransverseFieldIsingModel {
  CouplingModel coupling;
  double field = 1.0;  // h_x > 0
  bool include_self_term = true;

  int n_sites() const { return coupling.size; }
};

TransverseFieldIsingModel make_ising_model(double alpha, double coupling_strength,
                                           double self_term, int n_sites, bool kac_on,
                                           double field = 1.0, bool include_self_term = true);

// Raised when an amplitude callback returns a non-finite value; carries the
// offending configuration for diagnostics.
struct NonFiniteLogPsiError : std::runtime_error {
  NonFiniteLogPsiError(const std::string& what, SpinVector config)
      : std::runtime_error(what), configuration(std::move(config)) {}
  SpinVector configuration;
};

// <s|H_zz|s> over ordered pairs, plus the self-term constant. O(N^2) reference.
double diagonal_energy(const TransverseFieldIsingModel& model, const SpinVector& s);

// E_loc(s) = diagonal_energy(s) - h_x * sum_i exp(log_psi(flip_i s) - log_psi(s)).
// Exactly N amplitude-ratio evaluations per call.
double local_energy(const TransverseFieldIsingModel& model, const SpinVector& s,
                    const LogPsiFn& log_psi);

// Same, with the N flipped configurations evaluated in one batched call.
double local_energy(const TransverseFieldIsingModel& model, const SpinVector& s,
                    double log_psi_s, const BatchedLogPsiFn& log_psi);

// Local energies for a whole sample batch; log_psi_values are the cached
// amplitudes of the sample columns. Flip evaluations are chunked internally.
Eigen::VectorXd local_energy_batch(const TransverseFieldIsingModel& model,
                                   const SpinBatch& samples,
                                   const Eigen::VectorXd& log_psi_values,
                                   const BatchedLogPsiFn& log_psi);

}  // namespace lrvmc
