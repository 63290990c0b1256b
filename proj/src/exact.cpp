#include "lrvmc/exact.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "lrvmc/observables.hpp"
#include "lrvmc/rng.hpp"

namespace lrvmc {

namespace {

std::uint64_t basis_dim(int n_sites) { return std::uint64_t{1} << n_sites; }

// y = H x, matrix free. diag holds <b|H_zz|b> including the self-term constant.
void apply_hamiltonian(const Eigen::VectorXd& diag, double field, int n_sites,
                       const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const std::uint64_t dim = diag.size();
  y = diag.cwiseProduct(x);
  for (int i = 0; i < n_sites; ++i) {
    const std::uint64_t mask = std::uint64_t{1} << i;
    for (std::uint64_t b = 0; b < dim; ++b) {
      y[b] -= field * x[b ^ mask];
    }
  }
}

// Uniform-sign convention: flip so the largest-magnitude component is positive.
void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  if (v[at] < 0.0) v = -v;
}

ExactSolution dense_ground_state(const TransverseFieldIsingModel& model) {
  const Eigen::MatrixXd h = build_dense_hamiltonian(model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("ground_state: dense eigensolver failed");
  }
  ExactSolution sol;
  sol.n_sites = model.n_sites();
  sol.ground_energy = solver.eigenvalues()[0];
  sol.gap = h.rows() > 1 ? solver.eigenvalues()[1] - solver.eigenvalues()[0] : 0.0;
  sol.ground_vector = solver.eigenvectors().col(0);
  fix_sign(sol.ground_vector);
  return sol;
}

ExactSolution lanczos_ground_state(const TransverseFieldIsingModel& model) {
  const int n = model.n_sites();
  const std::uint64_t dim = basis_dim(n);
  const Eigen::VectorXd diag = diagonal_over_basis(model);

  const int max_iter = static_cast<int>(std::min<std::uint64_t>(dim, 400));
  Eigen::MatrixXd basis(dim, max_iter + 1);
  Eigen::VectorXd alpha(max_iter), beta(max_iter);

  auto rng = make_stream(0x9d2c5680u, 1);
  Eigen::VectorXd v(dim);
  for (std::uint64_t b = 0; b < dim; ++b) v[b] = uniform01(rng) - 0.5;
  v.normalize();
  basis.col(0) = v;

  Eigen::VectorXd w(dim);
  double prev_e0 = std::numeric_limits<double>::infinity();
  double prev_e1 = std::numeric_limits<double>::infinity();
  int m = 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver;
  for (int j = 0; j < max_iter; ++j) {
    apply_hamiltonian(diag, model.field, n, basis.col(j), w);
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    alpha[j] = basis.col(j).dot(w);
    w -= alpha[j] * basis.col(j);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    }
    beta[j] = w.norm();
    m = j + 1;
    if (m >= 2 && (m % 10 == 0 || beta[j] < 1e-12 || m == max_iter)) {
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
      for (int k = 0; k < m; ++k) {
        tri(k, k) = alpha[k];
        if (k + 1 < m) tri(k, k + 1) = tri(k + 1, k) = beta[k];
      }
      tri_solver.compute(tri);
      const double e0 = tri_solver.eigenvalues()[0];
      const double e1 = tri_solver.eigenvalues()[1];
      const double scale = std::max(1.0, std::abs(e0));
      if (std::abs(e0 - prev_e0) < 1e-13 * scale && std::abs(e1 - prev_e1) < 1e-11 * scale) {
        break;
      }
      prev_e0 = e0;
      prev_e1 = e1;
    }
    if (beta[j] < 1e-12) break;  // invariant subspace reached
    basis.col(j + 1) = w / beta[j];
  }
  if (m < 2) throw std::runtime_error("ground_state: Lanczos failed to build a subspace");

  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    tri(k, k) = alpha[k];
    if (k + 1 < m) tri(k, k + 1) = tri(k + 1, k) = beta[k];
  }
  tri_solver.compute(tri);
  ExactSolution sol;
  sol.n_sites = n;
  sol.ground_energy = tri_solver.eigenvalues()[0];
  sol.gap = tri_solver.eigenvalues()[1] - tri_solver.eigenvalues()[0];
  sol.ground_vector = basis.leftCols(m) * tri_solver.eigenvectors().col(0);
  sol.ground_vector.normalize();
  fix_sign(sol.ground_vector);
  return sol;
}

}  // namespace

Eigen::VectorXd diagonal_over_basis(const TransverseFieldIsingModel& model) {
  const int n = model.n_sites();
  const std::uint64_t dim = basis_dim(n);
  Eigen::VectorXd diag(dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    diag[b] = diagonal_energy(model, config_from_bits(b, n));
  }
  return diag;
}

Eigen::MatrixXd build_dense_hamiltonian(const TransverseFieldIsingModel& model) {
  const int n = model.n_sites();
  if (n > 14) throw std::invalid_argument("build_dense_hamiltonian: N > 14 rejected");
  const std::uint64_t dim = basis_dim(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::VectorXd diag = diagonal_over_basis(model);
  for (std::uint64_t b = 0; b < dim; ++b) {
    h(b, b) = diag[b];
    for (int i = 0; i < n; ++i) {
      h(b ^ (std::uint64_t{1} << i), b) = -model.field;
    }
  }
  return h;
}

ExactSolution ground_state(const TransverseFieldIsingModel& model, EigenMethod method) {
  const int n = model.n_sites();
  if (n > 14) throw std::invalid_argument("ground_state: N > 14 rejected");
  if (method == EigenMethod::kAuto) {
    method = n <= 10 ? EigenMethod::kDense : EigenMethod::kLanczos;
  }
  if (method == EigenMethod::kDense) {
    if (n > 12) throw std::invalid_argument("ground_state: dense solver limited to N <= 12");
    return dense_ground_state(model);
  }
  return lanczos_ground_state(model);
}

ExactObservables exact_observables(const ExactSolution& solution, double q,
                                   int partition_size) {
  const int n = solution.n_sites;
  const std::uint64_t dim = basis_dim(n);
  const int n_a = partition_size < 0 ? n / 2 : partition_size;
  if (n_a < 1 || n_a >= n) throw std::invalid_argument("exact_observables: bad partition");

  ExactObservables obs;
  double m2 = 0.0;
  for (std::uint64_t b = 0; b < dim; ++b) {
    const double m = staggered_magnetization(config_from_bits(b, n), q);
    m2 += solution.ground_vector[b] * solution.ground_vector[b] * m * m;
  }
  obs.m2 = m2;

  // Partition A = low bits; reshape the vector as M(a, a~) and take
  // Tr rho_A^2 = ||M^T M||_F^2.
  const std::uint64_t dim_a = std::uint64_t{1} << n_a;
  const std::uint64_t dim_b = dim >> n_a;
  Eigen::Map<const Eigen::MatrixXd> psi(solution.ground_vector.data(), dim_a, dim_b);
  const Eigen::MatrixXd gram = psi.transpose() * psi;
  obs.s2 = -std::log2(gram.squaredNorm());
  return obs;
}

ExactVariational exact_variational(const TransverseFieldIsingModel& model,
                                   const BatchedLogPsiFn& log_psi_fn, double q) {
  const int n = model.n_sites();
  if (n > 14) throw std::invalid_argument("exact_variational: N > 14 rejected");
  const std::uint64_t dim = basis_dim(n);
  SpinBatch all(n, dim);
  for (std::uint64_t b = 0; b < dim; ++b) all.col(b) = config_from_bits(b, n);
  Eigen::VectorXd lp = log_psi_fn(all);
  const double shift = lp.maxCoeff();
  Eigen::VectorXd psi = (lp.array() - shift).exp();
  psi.normalize();

  const Eigen::VectorXd diag = diagonal_over_basis(model);
  Eigen::VectorXd hpsi(dim);
  apply_hamiltonian(diag, model.field, n, psi, hpsi);

  ExactVariational result;
  result.energy = psi.dot(hpsi);
  result.variance = hpsi.squaredNorm() - result.energy * result.energy;
  double m2 = 0.0;
  for (std::uint64_t b = 0; b < dim; ++b) {
    const double m = staggered_magnetization(all.col(b), q);
    m2 += psi[b] * psi[b] * m * m;
  }
  result.m2 = m2;
  return result;
}

LogPsiFn exact_log_psi(const ExactSolution& solution) {
  const auto vec = std::make_shared<Eigen::VectorXd>(solution.ground_vector);
  return [vec](const SpinVector& s) { return std::log(std::abs((*vec)[config_bits(s)])); };
}

BatchedLogPsiFn exact_log_psi_batched(const ExactSolution& solution) {
  const auto vec = std::make_shared<Eigen::VectorXd>(solution.ground_vector);
  return [vec](const SpinBatch& configs) {
    Eigen::VectorXd out(configs.cols());
    for (Eigen::Index c = 0; c < configs.cols(); ++c) {
      out[c] = std::log(std::abs((*vec)[config_bits(configs.col(c))]));
    }
    return out;
  };
}

}  // namespace lrvmc
