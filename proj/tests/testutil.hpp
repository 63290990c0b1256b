#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <random>
#include <string>

#include "lrvmc/ansatz.hpp"
#include "lrvmc/spin.hpp"

namespace lrvmc::test {

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lrvmc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// log psi(s) = theta . s; derivatives are the configuration itself.
class LinearAnsatz : public Ansatz {
 public:
  explicit LinearAnsatz(int n_sites) : n_sites_(n_sites) {
    layout_.add("w", n_sites, 1.0);
  }
  std::string kind() const override { return "linear"; }
  int n_sites() const override { return n_sites_; }
  const ParameterLayout& layout() const override { return layout_; }
  Eigen::VectorXd log_psi_batch(const Eigen::VectorXd& theta,
                                const SpinBatch& configs) const override {
    return configs.transpose() * theta;
  }
  LogAmplitudeResult evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                              bool with_derivatives) const override {
    LogAmplitudeResult r;
    r.log_psi = theta.dot(s);
    if (with_derivatives) r.derivatives = s;
    return r;
  }

 private:
  int n_sites_;
  ParameterLayout layout_;
};

inline SpinVector random_spins(int n, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  return random_configuration(n, rng);
}

inline SpinBatch random_spin_batch(int n, int count, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  SpinBatch batch(n, count);
  for (int c = 0; c < count; ++c) batch.col(c) = random_configuration(n, rng);
  return batch;
}

}  // namespace lrvmc::test
