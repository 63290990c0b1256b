#include "lrvmc/coupling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrvmc {

double harmonic_number(long n, double alpha) {
  if (n < 1) throw std::invalid_argument("harmonic_number: N must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("harmonic_number: alpha must be >= 0");
  // Summed from the small terms up to limit rounding error growth.
  double sum = 0.0;
  for (long j = n; j >= 1; --j) sum += std::pow(static_cast<double>(j), -alpha);
  return sum;
}

CouplingModel build_coupling(double alpha, double coupling_strength, double self_term,
                             int n_sites, bool kac_on) {
  if (n_sites < 2) {
    throw std::invalid_argument("build_coupling: N must be >= 2, got " +
                                std::to_string(n_sites));
  }
  if (alpha < 0.0) {
    throw std::invalid_argument("build_coupling: alpha must be >= 0, got " +
                                std::to_string(alpha));
  }
  CouplingModel model;
  model.alpha = alpha;
  model.coupling_strength = coupling_strength;
  model.self_term = self_term;
  model.size = n_sites;
  model.kac_on = kac_on;
  model.coupling_row = Eigen::VectorXd::Zero(n_sites);
  double row_sum = 0.0;
  for (int r = n_sites - 1; r >= 1; --r) {
    const int dist = std::min(r, n_sites - r);
    model.coupling_row[r] = std::pow(static_cast<double>(dist), -alpha);
    row_sum += model.coupling_row[r];
  }
  model.kac_factor = self_term + row_sum;
  return model;
}

}  // namespace lrvmc
