#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrvmc/spin.hpp"

namespace lrvmc {

// Named slice of the flat parameter vector. Slices are allocated sequentially,
// so they are disjoint and cover the vector exactly by construction.
struct ParameterSlice {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  double init_scale = 0.0;  // stddev of the normal init; 0 = zeros, -1 = ones
};

class ParameterLayout {
 public:
  Eigen::Index add(std::string name, Eigen::Index size, double init_scale) {
    const Eigen::Index offset = total_;
    slices_.push_back({std::move(name), offset, size, init_scale});
    total_ += size;
    return offset;
  }
  Eigen::Index total() const { return total_; }
  const std::vector<ParameterSlice>& slices() const { return slices_; }
  const ParameterSlice& slice(std::string_view name) const {
    for (const auto& s : slices_) {
      if (s.name == name) return s;
    }
    throw std::invalid_argument("ParameterLayout: no slice named " + std::string(name));
  }

 private:
  std::vector<ParameterSlice> slices_;
  Eigen::Index total_ = 0;
};

struct LogAmplitudeResult {
  double log_psi = 0.0;
  std::optional<Eigen::VectorXd> derivatives;  // O_k(s) = d log psi / d theta_k
};

// Wave-function ansatz contract: a real log-amplitude over configurations plus
// its parameter log-derivatives. Evaluations are pure in (theta, s) and safe to
// run concurrently; parameters are only swapped between sampling sweeps.
class Ansatz {
 public:
  virtual ~Ansatz() = default;

  virtual std::string kind() const = 0;
  virtual int n_sites() const = 0;
  virtual const ParameterLayout& layout() const = 0;
  Eigen::Index parameter_count() const { return layout().total(); }

  // Log-amplitudes for a batch of configurations (one per column).
  virtual Eigen::VectorXd log_psi_batch(const Eigen::VectorXd& theta,
                                        const SpinBatch& configs) const = 0;

  double log_psi(const Eigen::VectorXd& theta, const SpinVector& s) const {
    return log_psi_batch(theta, s)[0];
  }

  virtual LogAmplitudeResult evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                                      bool with_derivatives) const = 0;

  // Zero biases, normal weights scaled by 1/sqrt(fan_in), deterministic in seed.
  Eigen::VectorXd initial_parameters(std::uint64_t seed) const;
};

// Central finite differences of log psi against analytic derivatives; returns
// the max relative error over components, falling back to the absolute error
// below 1e-10 magnitude. step must lie in [1e-7, 1e-3].
double check_gradients(const Ansatz& ansatz, const Eigen::VectorXd& theta,
                       const SpinVector& s, double step);

// Closure over a fixed parameter snapshot.
BatchedLogPsiFn make_batched_log_psi(const Ansatz& ansatz, Eigen::VectorXd theta);

// Same contract, but all 2^N amplitudes are evaluated once up front and later
// calls are table lookups. Only sensible for small N; values are identical to
// the direct callback.
BatchedLogPsiFn make_tabulated_log_psi(const Ansatz& ansatz, const Eigen::VectorXd& theta);

}  // namespace lrvmc
