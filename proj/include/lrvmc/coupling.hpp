#pragma once

#include <Eigen/Dense>

namespace lrvmc {

// Generalized harmonic number H_N^(alpha) = sum_{j=1..N} j^-alpha by direct
// summation in double precision.
double harmonic_number(long n, double alpha);

// Power-law coupling structure on a periodic chain.
//
// Offsets r = (j - i) mod N between ordered site pairs carry the coupling
// coupling_row[r] = dist(r)^-alpha with the ring distance dist(r) = min(r, N-r).
// This convention makes the Hamiltonian translation invariant and gives the
// two-sided row sum b + 2*zeta(alpha) in the large-N limit.
struct CouplingModel {
  double alpha = 0.0;              // decay exponent, >= 0
  double coupling_strength = 0.0;  // J, in units of h_x
  double self_term = 1.0;          // b
  int size = 0;                    // N
  bool kac_on = true;
  Eigen::VectorXd coupling_row;    // length N; [0] = 0, [r] = dist(r)^-alpha
  double kac_factor = 1.0;         // self_term + sum of off-diagonal row entries

  // Divisor actually applied to couplings; 1 when Kac normalization is off.
  double kac_divisor() const { return kac_on ? kac_factor : 1.0; }

  // J_ij between ordered sites at offset r, including normalization.
  double pair_coefficient(int offset) const {
    return coupling_strength * coupling_row[offset] / kac_divisor();
  }
};

// Builds the coupling row and Kac factor. Rejects N < 2 and alpha < 0.
CouplingModel build_coupling(double alpha, double coupling_strength, double self_term,
                             int n_sites, bool kac_on);

}  // namespace lrvmc
