#include "lrvmc/mlp.hpp"

#include <stdexcept>
#include <string>

namespace lrvmc {

Eigen::VectorXd mlp_forward(const std::vector<Eigen::MatrixXd>& weights,
                            const std::vector<Eigen::VectorXd>& biases, Activation activation,
                            const Eigen::VectorXd& x) {
  if (weights.size() != biases.size()) {
    throw std::invalid_argument("mlp_forward: weights/biases layer count mismatch");
  }
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].cols() != h.size() || weights[l].rows() != biases[l].size()) {
      throw std::invalid_argument("mlp_forward: dimension mismatch at layer " +
                                  std::to_string(l));
    }
    Eigen::VectorXd pre = weights[l] * h + biases[l];
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = activate(activation, pre[i]);
    h = std::move(pre);
  }
  return h;
}

FfnnAnsatz::FfnnAnsatz(int n_sites, std::vector<int> layer_dims, Activation activation)
    : n_sites_(n_sites), activation_(activation) {
  if (n_sites < 1) throw std::invalid_argument("FfnnAnsatz: N must be >= 1");
  if (layer_dims.empty()) throw std::invalid_argument("FfnnAnsatz: need at least one layer");
  dims_.push_back(n_sites);
  for (int d : layer_dims) {
    if (d < 1) throw std::invalid_argument("FfnnAnsatz: layer widths must be >= 1");
    dims_.push_back(d);
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    layout_.add("w" + std::to_string(l + 1),
                static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l], scale);
    layout_.add("b" + std::to_string(l + 1), dims_[l + 1], 0.0);
  }
}

namespace {

// Maps of one layer's weight/bias inside the flat vector.
struct LayerView {
  Eigen::Map<const Eigen::MatrixXd> w;
  Eigen::Map<const Eigen::VectorXd> b;
};

LayerView layer_view(const Eigen::VectorXd& theta, const ParameterLayout& layout,
                     std::size_t l, int rows, int cols) {
  const auto& ws = layout.slice("w" + std::to_string(l + 1));
  const auto& bs = layout.slice("b" + std::to_string(l + 1));
  return {Eigen::Map<const Eigen::MatrixXd>(theta.data() + ws.offset, rows, cols),
          Eigen::Map<const Eigen::VectorXd>(theta.data() + bs.offset, rows)};
}

}  // namespace

Eigen::VectorXd FfnnAnsatz::log_psi_batch(const Eigen::VectorXd& theta,
                                          const SpinBatch& configs) const {
  if (configs.rows() != n_sites_) throw std::invalid_argument("FfnnAnsatz: bad input size");
  Eigen::MatrixXd h = configs;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    auto view = layer_view(theta, layout_, l, dims_[l + 1], dims_[l]);
    Eigen::MatrixXd pre = view.w * h;
    pre.colwise() += view.b;
    activate_inplace(activation_, pre);
    h = std::move(pre);
  }
  return h.colwise().sum();
}

LogAmplitudeResult FfnnAnsatz::evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                                        bool with_derivatives) const {
  const std::size_t n_layers = dims_.size() - 1;
  std::vector<Eigen::VectorXd> activations(n_layers + 1);
  std::vector<Eigen::VectorXd> preacts(n_layers);
  activations[0] = s;
  for (std::size_t l = 0; l < n_layers; ++l) {
    auto view = layer_view(theta, layout_, l, dims_[l + 1], dims_[l]);
    preacts[l] = view.w * activations[l] + view.b;
    activations[l + 1] = preacts[l].unaryExpr(
        [this](double v) { return activate(activation_, v); });
  }
  LogAmplitudeResult result;
  result.log_psi = activations[n_layers].sum();
  if (!with_derivatives) return result;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.total());
  // d log psi / d (output components) = 1.
  Eigen::VectorXd up = Eigen::VectorXd::Ones(dims_[n_layers]);
  for (std::size_t l = n_layers; l-- > 0;) {
    Eigen::VectorXd dpre = up;
    for (Eigen::Index i = 0; i < dpre.size(); ++i) {
      dpre[i] *= activate_derivative(activation_, preacts[l][i]);
    }
    const auto& ws = layout_.slice("w" + std::to_string(l + 1));
    const auto& bs = layout_.slice("b" + std::to_string(l + 1));
    Eigen::Map<Eigen::MatrixXd>(grad.data() + ws.offset, dims_[l + 1], dims_[l]) =
        dpre * activations[l].transpose();
    grad.segment(bs.offset, bs.size) = dpre;
    if (l > 0) {
      auto view = layer_view(theta, layout_, l, dims_[l + 1], dims_[l]);
      up = view.w.transpose() * dpre;
    }
  }
  result.derivatives = std::move(grad);
  return result;
}

}  // namespace lrvmc
