#pragma once

#include "lrvmc/mlp.hpp"

namespace lrvmc {

// Real RBM-like ansatz: log psi(s) = sum_j log cosh((W s + b)_j), with the
// visible bias fixed to zero. Parameters are theta = {W, b}.
class RbmAnsatz : public Ansatz {
 public:
  RbmAnsatz(int n_sites, int hidden_width);

  std::string kind() const override { return "rbm"; }
  int n_sites() const override { return n_sites_; }
  int hidden_width() const { return width_; }
  const ParameterLayout& layout() const override { return layout_; }

  Eigen::VectorXd log_psi_batch(const Eigen::VectorXd& theta,
                                const SpinBatch& configs) const override;
  LogAmplitudeResult evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                              bool with_derivatives) const override;

 private:
  int n_sites_;
  int width_;
  ParameterLayout layout_;
};

// Hidden width for a given density. The density counts follow the complex-RBM
// accounting (density 1 at N = 50 has 5100 real parameters), so a real-valued
// machine carries 2 * density * N hidden units.
int rbm_width_for_density(int n_sites, int density);

}  // namespace lrvmc
