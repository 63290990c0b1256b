#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "lrvmc/exact.hpp"
#include "testutil.hpp"

using namespace lrvmc;

TEST_CASE("dense hamiltonian: single site is the pure transverse field") {
  const auto model = make_ising_model(2.0, 0.0, 1.0, 1, true);
  const Eigen::MatrixXd h = build_dense_hamiltonian(model);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, -1.0, -1.0, 0.0;
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dense hamiltonian: off-diagonal row sums equal h_x N") {
  const auto model = make_ising_model(1.5, -0.7, 1.0, 4, true);
  const Eigen::MatrixXd h = build_dense_hamiltonian(model);
  for (int b = 0; b < 16; ++b) {
    double sum = 0.0;
    for (int b2 = 0; b2 < 16; ++b2) {
      if (b2 != b) sum += std::abs(h(b, b2));
    }
    CHECK(sum == doctest::Approx(model.field * 4).epsilon(1e-13));
  }
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense hamiltonian: matches a Kronecker-product build at N = 3") {
  const auto model = make_ising_model(2.5, 1.3, 1.0, 3, true);
  const int n = 3;
  Eigen::Matrix2d sz, sx, id;
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  id.setIdentity();
  // site i lives on bit i, so site 0 is the fastest-varying tensor factor
  auto site_op = [&](const Eigen::Matrix2d& op, int site) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
      const Eigen::Matrix2d& factor = (k == site) ? op : id;
      acc = Eigen::kroneckerProduct(factor, acc).eval();
    }
    return acc;
  };
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int dist = std::min(std::abs(i - j), n - std::abs(i - j));
      const double coeff = model.coupling.coupling_strength * std::pow(dist, -2.5) /
                           model.coupling.kac_factor;
      expected += coeff * (site_op(sz, i) * site_op(sz, j));
    }
    expected -= model.field * site_op(sx, i);
  }
  expected += model.coupling.coupling_strength * model.coupling.self_term * n /
              model.coupling.kac_factor * Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd h = build_dense_hamiltonian(model);
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dense hamiltonian: size guard") {
  const auto model = make_ising_model(2.0, 1.0, 1.0, 15, true);
  CHECK_THROWS_AS((void)build_dense_hamiltonian(model), std::invalid_argument);
  CHECK_THROWS_AS((void)ground_state(model), std::invalid_argument);
}

TEST_CASE("ground state: free spins") {
  const auto one = ground_state(make_ising_model(2.0, 0.0, 1.0, 1, true));
  CHECK(one.ground_energy == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(one.ground_vector[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(one.ground_vector[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  const auto two = ground_state(make_ising_model(2.0, 0.0, 1.0, 2, true));
  CHECK(two.ground_energy == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(two.gap == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("ground state: Perron-Frobenius positivity") {
  const auto sol = ground_state(make_ising_model(2.5, -2.09, 1.0, 6, false));
  for (Eigen::Index b = 0; b < sol.ground_vector.size(); ++b) {
    CHECK(sol.ground_vector[b] > 0.0);
  }
}

TEST_CASE("ground state: Lanczos agrees with the dense solver") {
  const auto model = make_ising_model(2.5, -2.09, 1.0, 10, false);
  const auto dense = ground_state(model, EigenMethod::kDense);
  const auto lanczos = ground_state(model, EigenMethod::kLanczos);
  CHECK(lanczos.ground_energy == doctest::Approx(dense.ground_energy).epsilon(1e-11));
  CHECK(lanczos.gap == doctest::Approx(dense.gap).epsilon(1e-7));
  CHECK((lanczos.ground_vector - dense.ground_vector).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("spectrum invariant under a global spin flip") {
  const auto model = make_ising_model(1.8, 1.1, 1.0, 6, true);
  const Eigen::MatrixXd h = build_dense_hamiltonian(model);
  const int dim = 64;
  Eigen::MatrixXd flipped(dim, dim);
  for (int b = 0; b < dim; ++b) {
    for (int b2 = 0; b2 < dim; ++b2) {
      flipped(b, b2) = h((~b) & (dim - 1), (~b2) & (dim - 1));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sa(h), sb(flipped);
  CHECK((sa.eigenvalues() - sb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact observables: product ground state at J = 0") {
  const auto sol = ground_state(make_ising_model(2.0, 0.0, 1.0, 8, true));
  const auto obs = exact_observables(sol, 0.0);
  CHECK(obs.m2 == doctest::Approx(1.0 / 8.0).epsilon(1e-10));
  CHECK(std::abs(obs.s2) < 1e-10);
}

TEST_CASE("exact observables: deep ferromagnet approaches the two-state limit") {
  const auto sol = ground_state(make_ising_model(6.0, -10.0, 1.0, 8, true));
  const auto obs = exact_observables(sol, 0.0);
  CHECK(obs.m2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(obs.s2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("local energy with the exact eigenvector has zero variance") {
  const auto model = make_ising_model(2.5, -2.1, 1.0, 8, false);
  const auto sol = ground_state(model);
  const LogPsiFn lp = exact_log_psi(sol);
  double max_dev = 0.0;
  for (int b = 0; b < 256; ++b) {
    const double e = local_energy(model, config_from_bits(b, 8), lp);
    max_dev = std::max(max_dev, std::abs(e - sol.ground_energy));
  }
  CHECK(max_dev < 1e-8);
}

TEST_CASE("exact variational: the ground-state callback reproduces E0") {
  const auto model = make_ising_model(2.5, 4.75, 1.0, 8, false);
  const auto sol = ground_state(model);
  const auto var = exact_variational(model, exact_log_psi_batched(sol), 3.14159265358979324);
  CHECK(var.energy == doctest::Approx(sol.ground_energy).epsilon(1e-10));
  CHECK(std::abs(var.variance) < 1e-7);
  const auto obs = exact_observables(sol, 3.14159265358979324);
  CHECK(var.m2 == doctest::Approx(obs.m2).epsilon(1e-9));
}

TEST_CASE("oracle energy is a variational lower bound for simple states") {
  const auto model = make_ising_model(2.5, -1.5, 1.0, 6, true);
  const auto sol = ground_state(model);
  const BatchedLogPsiFn uniform = [](const SpinBatch& configs) {
    return Eigen::VectorXd::Zero(configs.cols());
  };
  CHECK(exact_variational(model, uniform, 0.0).energy >= sol.ground_energy - 1e-12);
}
