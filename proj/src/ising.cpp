#include "lrvmc/ising.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lrvmc {

TransverseFieldIsingModel make_ising_model(double alpha, double coupling_strength,
                                           double self_term, int n_sites, bool kac_on,
                                           double field, bool include_self_term) {
  if (field <= 0.0) throw std::invalid_argument("make_ising_model: field must be > 0");
  TransverseFieldIsingModel model;
  if (n_sites == 1) {
    // Single site: no pairs, only the self term. build_coupling itself
    // requires N >= 2.
    model.coupling.alpha = alpha;
    model.coupling.coupling_strength = coupling_strength;
    model.coupling.self_term = self_term;
    model.coupling.size = 1;
    model.coupling.kac_on = kac_on;
    model.coupling.coupling_row = Eigen::VectorXd::Zero(1);
    model.coupling.kac_factor = self_term;
  } else {
    model.coupling = build_coupling(alpha, coupling_strength, self_term, n_sites, kac_on);
  }
  model.field = field;
  model.include_self_term = include_self_term;
  return model;
}

double diagonal_energy(const TransverseFieldIsingModel& model, const SpinVector& s) {
  const CouplingModel& c = model.coupling;
  const int n = c.size;
  double pair_sum = 0.0;
  // Ordered pairs (i, i+r): offset r covers each ordered pair exactly once.
  for (int r = 1; r < n; ++r) {
    const double row = c.coupling_row[r];
    double corr = 0.0;
    for (int i = 0; i < n; ++i) corr += s[i] * s[(i + r) % n];
    pair_sum += row * corr;
  }
  double energy = c.coupling_strength * pair_sum / c.kac_divisor();
  if (model.include_self_term) {
    energy += c.coupling_strength * c.self_term * n / c.kac_divisor();
  }
  return energy;
}

namespace {

double offdiagonal_from_ratios(const TransverseFieldIsingModel& model, const SpinVector& s,
                               double log_psi_s, const Eigen::VectorXd& log_psi_flips) {
  if (!std::isfinite(log_psi_s)) {
    throw NonFiniteLogPsiError("local_energy: non-finite log-amplitude at sample", s);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double lp = log_psi_flips[i];
    if (!std::isfinite(lp) && !(lp == -std::numeric_limits<double>::infinity())) {
      SpinVector bad = s;
      bad[i] = -bad[i];
      throw NonFiniteLogPsiError("local_energy: non-finite log-amplitude at flipped site " +
                                     std::to_string(i),
                                 bad);
    }
    acc += std::exp(lp - log_psi_s);
  }
  return -model.field * acc;
}

}  // namespace

double local_energy(const TransverseFieldIsingModel& model, const SpinVector& s,
                    const LogPsiFn& log_psi) {
  const Eigen::Index n = s.size();
  const double lp_s = log_psi(s);
  Eigen::VectorXd lp_flips(n);
  SpinVector flipped = s;
  for (Eigen::Index i = 0; i < n; ++i) {
    flipped[i] = -flipped[i];
    lp_flips[i] = log_psi(flipped);
    flipped[i] = -flipped[i];
  }
  return diagonal_energy(model, s) + offdiagonal_from_ratios(model, s, lp_s, lp_flips);
}

double local_energy(const TransverseFieldIsingModel& model, const SpinVector& s,
                    double log_psi_s, const BatchedLogPsiFn& log_psi) {
  const Eigen::Index n = s.size();
  SpinBatch flips(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    flips.col(i) = s;
    flips(i, i) = -flips(i, i);
  }
  const Eigen::VectorXd lp_flips = log_psi(flips);
  return diagonal_energy(model, s) + offdiagonal_from_ratios(model, s, log_psi_s, lp_flips);
}

Eigen::VectorXd local_energy_batch(const TransverseFieldIsingModel& model,
                                   const SpinBatch& samples,
                                   const Eigen::VectorXd& log_psi_values,
                                   const BatchedLogPsiFn& log_psi) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index n_samples = samples.cols();
  Eigen::VectorXd energies(n_samples);

  // Chunked so the flip batch stays within a bounded working-set size.
  const Eigen::Index max_cols = 65536;
  const Eigen::Index chunk = std::max<Eigen::Index>(1, max_cols / std::max<Eigen::Index>(1, n));
  SpinBatch flips;
  for (Eigen::Index start = 0; start < n_samples; start += chunk) {
    const Eigen::Index count = std::min(chunk, n_samples - start);
    flips.resize(n, count * n);
    for (Eigen::Index m = 0; m < count; ++m) {
      for (Eigen::Index i = 0; i < n; ++i) {
        flips.col(m * n + i) = samples.col(start + m);
        flips(i, m * n + i) = -flips(i, m * n + i);
      }
    }
    const Eigen::VectorXd lp_flips = log_psi(flips);
    for (Eigen::Index m = 0; m < count; ++m) {
      const SpinVector s = samples.col(start + m);
      energies[start + m] =
          diagonal_energy(model, s) +
          offdiagonal_from_ratios(model, s, log_psi_values[start + m],
                                  lp_flips.segment(m * n, n));
    }
  }
  return energies;
}

}  // namespace lrvmc
