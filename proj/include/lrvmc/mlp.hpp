#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "lrvmc/ansatz.hpp"

namespace lrvmc {

enum class Activation { kIdentity, kLogCosh, kSilu, kTanh };

// Overflow-safe log cosh: |x| + log1p(exp(-2|x|)) - log 2.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094172321214581766;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }

inline double activate(Activation f, double x) {
  switch (f) {
    case Activation::kIdentity: return x;
    case Activation::kLogCosh: return log_cosh(x);
    case Activation::kSilu: return silu(x);
    case Activation::kTanh: return std::tanh(x);
  }
  return x;
}

// Derivative in terms of the pre-activation value.
inline double activate_derivative(Activation f, double x) {
  switch (f) {
    case Activation::kIdentity: return 1.0;
    case Activation::kLogCosh: return std::tanh(x);
    case Activation::kSilu: {
      const double s = sigmoid(x);
      return s * (1.0 + x * (1.0 - s));
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

template <typename Derived>
void activate_inplace(Activation f, Eigen::MatrixBase<Derived>& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = activate(f, x(i, j));
  }
}

// Affine map + elementwise activation, applied layer by layer. weights[l] maps
// dims[l] -> dims[l+1]; the activation is applied after every layer.
Eigen::VectorXd mlp_forward(const std::vector<Eigen::MatrixXd>& weights,
                            const std::vector<Eigen::VectorXd>& biases, Activation activation,
                            const Eigen::VectorXd& x);

// Feed-forward baseline: log psi(s) = sum over components of MLP(s).
// layer_dims lists the widths after the input layer, e.g. {2N, 1}.
class FfnnAnsatz : public Ansatz {
 public:
  FfnnAnsatz(int n_sites, std::vector<int> layer_dims,
             Activation activation = Activation::kLogCosh);

  std::string kind() const override { return "mlp"; }
  int n_sites() const override { return n_sites_; }
  const ParameterLayout& layout() const override { return layout_; }
  const std::vector<int>& layer_dims() const { return dims_; }

  Eigen::VectorXd log_psi_batch(const Eigen::VectorXd& theta,
                                const SpinBatch& configs) const override;
  LogAmplitudeResult evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                              bool with_derivatives) const override;

 private:
  int n_sites_;
  std::vector<int> dims_;  // including the input width
  Activation activation_;
  ParameterLayout layout_;
};

}  // namespace lrvmc
