#include "lrvmc/ansatz.hpp"

#include <cmath>
#include <stdexcept>

#include "lrvmc/rng.hpp"

namespace lrvmc {

Eigen::VectorXd Ansatz::initial_parameters(std::uint64_t seed) const {
  const ParameterLayout& lay = layout();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(lay.total());
  // One stream per slice, keyed by slice index, so the draw is independent of
  // how other slices are sized.
  std::uint64_t slice_index = 0;
  for (const auto& slice : lay.slices()) {
    if (slice.init_scale > 0.0) {
      auto rng = make_stream(seed, slice_index);
      for (Eigen::Index k = 0; k < slice.size; ++k) {
        theta[slice.offset + k] = slice.init_scale * standard_normal(rng);
      }
    } else if (slice.init_scale < 0.0) {
      theta.segment(slice.offset, slice.size).setOnes();
    }
    ++slice_index;
  }
  return theta;
}

double check_gradients(const Ansatz& ansatz, const Eigen::VectorXd& theta,
                       const SpinVector& s, double step) {
  if (!(step >= 1e-7 && step <= 1e-3)) {
    throw std::invalid_argument("check_gradients: step must lie in [1e-7, 1e-3]");
  }
  const LogAmplitudeResult result = ansatz.evaluate(theta, s, true);
  if (!result.derivatives) {
    throw std::runtime_error("check_gradients: ansatz returned no derivatives");
  }
  const Eigen::VectorXd& analytic = *result.derivatives;
  if (!analytic.allFinite()) {
    throw std::runtime_error("check_gradients: non-finite analytic derivatives");
  }
  Eigen::VectorXd probe = theta;
  double max_err = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + step;
    const double plus = ansatz.log_psi(probe, s);
    probe[k] = saved - step;
    const double minus = ansatz.log_psi(probe, s);
    probe[k] = saved;
    const double fd = (plus - minus) / (2.0 * step);
    if (!std::isfinite(fd)) {
      throw std::runtime_error("check_gradients: non-finite finite-difference value");
    }
    const double denom = std::max(std::abs(analytic[k]), std::abs(fd));
    const double err = denom < 1e-10 ? std::abs(analytic[k] - fd)
                                     : std::abs(analytic[k] - fd) / denom;
    max_err = std::max(max_err, err);
  }
  return max_err;
}

BatchedLogPsiFn make_batched_log_psi(const Ansatz& ansatz, Eigen::VectorXd theta) {
  return [&ansatz, theta = std::move(theta)](const SpinBatch& configs) {
    return ansatz.log_psi_batch(theta, configs);
  };
}

BatchedLogPsiFn make_tabulated_log_psi(const Ansatz& ansatz, const Eigen::VectorXd& theta) {
  const int n = ansatz.n_sites();
  if (n > 20) throw std::invalid_argument("make_tabulated_log_psi: N too large to tabulate");
  const std::uint64_t dim = std::uint64_t{1} << n;
  SpinBatch all(n, dim);
  for (std::uint64_t b = 0; b < dim; ++b) all.col(b) = config_from_bits(b, n);
  auto table = std::make_shared<Eigen::VectorXd>(ansatz.log_psi_batch(theta, all));
  return [table, n](const SpinBatch& configs) {
    Eigen::VectorXd out(configs.cols());
    for (Eigen::Index c = 0; c < configs.cols(); ++c) {
      out[c] = (*table)[config_bits(configs.col(c))];
    }
    return out;
  };
}

}  // namespace lrvmc
