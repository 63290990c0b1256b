#include "lrvmc/rbm.hpp"

#include <stdexcept>

namespace lrvmc {

int rbm_width_for_density(int n_sites, int density) {
  if (density < 1) throw std::invalid_argument("rbm_width_for_density: density must be >= 1");
  return 2 * density * n_sites;
}

RbmAnsatz::RbmAnsatz(int n_sites, int hidden_width)
    : n_sites_(n_sites), width_(hidden_width) {
  if (n_sites < 1) throw std::invalid_argument("RbmAnsatz: N must be >= 1");
  if (hidden_width < 1) throw std::invalid_argument("RbmAnsatz: hidden width must be >= 1");
  layout_.add("W", static_cast<Eigen::Index>(width_) * n_sites_,
              1.0 / std::sqrt(static_cast<double>(n_sites_)));
  layout_.add("b", width_, 0.0);
}

Eigen::VectorXd RbmAnsatz::log_psi_batch(const Eigen::VectorXd& theta,
                                         const SpinBatch& configs) const {
  if (configs.rows() != n_sites_) {
    throw std::invalid_argument("RbmAnsatz: configuration width mismatch");
  }
  Eigen::Map<const Eigen::MatrixXd> w(theta.data() + layout_.slice("W").offset, width_,
                                      n_sites_);
  Eigen::Map<const Eigen::VectorXd> b(theta.data() + layout_.slice("b").offset, width_);
  Eigen::MatrixXd pre = w * configs;
  pre.colwise() += b;
  Eigen::VectorXd out(configs.cols());
  for (Eigen::Index c = 0; c < pre.cols(); ++c) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pre.rows(); ++j) acc += log_cosh(pre(j, c));
    out[c] = acc;
  }
  return out;
}

LogAmplitudeResult RbmAnsatz::evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                                       bool with_derivatives) const {
  if (s.size() != n_sites_) throw std::invalid_argument("RbmAnsatz: configuration mismatch");
  Eigen::Map<const Eigen::MatrixXd> w(theta.data() + layout_.slice("W").offset, width_,
                                      n_sites_);
  Eigen::Map<const Eigen::VectorXd> b(theta.data() + layout_.slice("b").offset, width_);
  const Eigen::VectorXd pre = w * s + b;
  LogAmplitudeResult result;
  for (Eigen::Index j = 0; j < width_; ++j) result.log_psi += log_cosh(pre[j]);
  if (!with_derivatives) return result;

  Eigen::VectorXd grad(layout_.total());
  const Eigen::VectorXd t = pre.array().tanh();
  Eigen::Map<Eigen::MatrixXd>(grad.data() + layout_.slice("W").offset, width_, n_sites_) =
      t * s.transpose();
  grad.segment(layout_.slice("b").offset, width_) = t;
  result.derivatives = std::move(grad);
  return result;
}

}  // namespace lrvmc
