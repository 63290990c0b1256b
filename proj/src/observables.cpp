#include "lrvmc/observables.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrvmc {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

double staggered_magnetization(const SpinVector& s, double q) {
  const Eigen::Index n = s.size();
  if (std::abs(q) < 1e-12) {
    return s.sum() / static_cast<double>(n);
  }
  if (std::abs(q - kPi) < 1e-12) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += (j % 2 == 0 ? s[j] : -s[j]);
    return acc / static_cast<double>(n);
  }
  throw std::invalid_argument("staggered_magnetization: q must be 0 or pi");
}

double wavevector_for_coupling(double coupling_strength) {
  return coupling_strength > 0.0 ? kPi : 0.0;
}

MagnetizationResult m_squared_estimator(const SpinBatch& samples, double q) {
  const Eigen::Index n_samples = samples.cols();
  if (n_samples < 2) throw std::invalid_argument("m_squared_estimator: need >= 2 samples");
  Eigen::VectorXd m2(n_samples);
  for (Eigen::Index k = 0; k < n_samples; ++k) {
    const double m = staggered_magnetization(samples.col(k), q);
    m2[k] = m * m;
  }
  MagnetizationResult result;
  result.q = q;
  result.m2_mean = m2.mean();
  result.sample_count = n_samples;

  // Batch means over the sample order, so chain correlations inflate the error
  // estimate instead of hiding in it.
  const Eigen::Index n_batches = std::min<Eigen::Index>(64, n_samples / 2);
  if (n_batches >= 2) {
    const Eigen::Index size = n_samples / n_batches;
    double sq = 0.0;
    for (Eigen::Index b = 0; b < n_batches; ++b) {
      const double bm = m2.segment(b * size, size).mean();
      sq += (bm - result.m2_mean) * (bm - result.m2_mean);
    }
    result.std_error = std::sqrt(sq / (n_batches * (n_batches - 1.0)));
  } else {
    const double var = (m2.array() - result.m2_mean).square().sum() / (n_samples - 1.0);
    result.std_error = std::sqrt(var / n_samples);
  }
  return result;
}

RenyiResult renyi2_swap_estimator(const SpinBatch& stream_a, const SpinBatch& stream_b,
                                  const BatchedLogPsiFn& log_psi_fn) {
  if (stream_a.rows() != stream_b.rows()) {
    throw std::invalid_argument("renyi2: stream configuration sizes differ");
  }
  const Eigen::Index n = stream_a.rows();
  const Eigen::Index pairs = std::min(stream_a.cols(), stream_b.cols());
  if (pairs < 2) throw std::invalid_argument("renyi2: need >= 2 pairs");
  const Eigen::Index half = n / 2;  // partition A = first half of the chain

  // Four evaluations per pair: the two originals and the two A-swapped states.
  SpinBatch all(n, 4 * pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const auto a = stream_a.col(k);
    const auto b = stream_b.col(k);
    all.col(4 * k + 0) = a;
    all.col(4 * k + 1) = b;
    all.col(4 * k + 2).head(half) = a.head(half);
    all.col(4 * k + 2).tail(n - half) = b.tail(n - half);
    all.col(4 * k + 3).head(half) = b.head(half);
    all.col(4 * k + 3).tail(n - half) = a.tail(n - half);
  }
  const Eigen::VectorXd lp = log_psi_fn(all);
  Eigen::VectorXd swap(pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    swap[k] = std::exp(lp[4 * k + 2] + lp[4 * k + 3] - lp[4 * k + 0] - lp[4 * k + 1]);
  }

  RenyiResult result;
  result.pair_count = pairs;
  result.swap_mean = swap.mean();
  if (!(result.swap_mean > 0.0)) {
    result.undersampled = true;
    result.s2 = std::numeric_limits<double>::quiet_NaN();
    result.std_error = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.s2 = -std::log2(result.swap_mean);

  // Delete-one jackknife on the log transform.
  const double total = swap.sum();
  double jk_mean = 0.0;
  Eigen::VectorXd jk(pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const double leave_out = (total - swap[k]) / (pairs - 1.0);
    jk[k] = leave_out > 0.0 ? -std::log2(leave_out) : result.s2;
    jk_mean += jk[k];
  }
  jk_mean /= static_cast<double>(pairs);
  const double var = (jk.array() - jk_mean).square().sum() * (pairs - 1.0) / pairs;
  result.std_error = std::sqrt(var);
  return result;
}

RenyiResult renyi2_from_batch(const SpinBatch& samples, const BatchedLogPsiFn& log_psi_fn) {
  const Eigen::Index half = samples.cols() / 2;
  if (half < 2) throw std::invalid_argument("renyi2: need >= 4 samples to pair");
  return renyi2_swap_estimator(samples.leftCols(half), samples.rightCols(half), log_psi_fn);
}

VScoreResult v_score(const Eigen::VectorXd& local_energies, int n_sites) {
  const Eigen::Index m = local_energies.size();
  if (m < 2) throw std::invalid_argument("v_score: need >= 2 samples");
  VScoreResult result;
  result.mean_energy = local_energies.mean();
  result.energy_variance =
      (local_energies.array() - result.mean_energy).square().sum() / (m - 1.0);
  const double sigma_mean = std::sqrt(result.energy_variance / m);
  if (result.mean_energy == 0.0 || std::abs(result.mean_energy) <= 3.0 * sigma_mean) {
    result.defined = false;
    result.value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.value =
      n_sites * result.energy_variance / (result.mean_energy * result.mean_energy);
  return result;
}

}  // namespace lrvmc
