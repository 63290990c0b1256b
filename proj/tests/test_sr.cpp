#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lrvmc/exact.hpp"
#include "lrvmc/rbm.hpp"
#include "lrvmc/sr.hpp"
#include "testutil.hpp"

using namespace lrvmc;

TEST_CASE("learning rate schedule: warm-up and decay") {
  LearningRateSchedule lr;  // 0.1 -> 2.0 over 75, gamma 0.995
  lr.validate();
  CHECK(lr.at(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(lr.at(75) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lr.at(76) == doctest::Approx(1.99).epsilon(1e-12));
  CHECK(lr.at(30) == doctest::Approx(0.1 + 1.9 * 30.0 / 75.0).epsilon(1e-13));

  LearningRateSchedule bad;
  bad.initial = 3.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = LearningRateSchedule{};
  bad.decay_ratio = 1.2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("diagonal shift schedule: linear and positive") {
  DiagonalShiftSchedule shift{1e-2, 1e-4, 250};
  shift.validate();
  CHECK(shift.at(0) == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(shift.at(249) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(shift.at(1000) == doctest::Approx(1e-4).epsilon(1e-12));
  for (int it = 0; it < 250; ++it) CHECK(shift.at(it) > 0.0);

  DiagonalShiftSchedule bad{0.0, 1e-4, 10};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sr statistics: identical samples give zero covariance and force") {
  Eigen::MatrixXd derivs(3, 5);
  for (int k = 0; k < 5; ++k) derivs.col(k) << 0.2, -1.0, 0.5;
  const Eigen::VectorXd energies = Eigen::VectorXd::Constant(5, -4.2);
  const SrStatistics stats = accumulate_sr_statistics(derivs, energies);
  CHECK(stats.covariance().cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.force.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.mean_energy == doctest::Approx(-4.2).epsilon(1e-15));
  CHECK(stats.energy_variance == 0.0);
}

TEST_CASE("sr statistics: hand-computed two-sample case") {
  Eigen::MatrixXd derivs(2, 2);
  derivs.col(0) << 1.0, 2.0;
  derivs.col(1) << 3.0, -2.0;
  Eigen::VectorXd energies(2);
  energies << -1.0, 5.0;
  const SrStatistics stats = accumulate_sr_statistics(derivs, energies);
  // <O> = (2, 0); centered columns (-1, 2), (1, -2)
  CHECK(stats.mean_derivatives[0] == doctest::Approx(2.0));
  CHECK(stats.mean_derivatives[1] == doctest::Approx(0.0));
  const Eigen::MatrixXd s = stats.covariance();
  CHECK(s(0, 0) == doctest::Approx(1.0));
  CHECK(s(0, 1) == doctest::Approx(-2.0));
  CHECK(s(1, 1) == doctest::Approx(4.0));
  // F = <E O> - <E><O> = ((-1*1 + 5*3)/2 - 2*2, (-1*2 + 5*-2)/2 - 0) = (3, -6)
  CHECK(stats.force[0] == doctest::Approx(3.0));
  CHECK(stats.force[1] == doctest::Approx(-6.0));
}

TEST_CASE("sr statistics: constant energies give an exactly zero force") {
  const SpinBatch samples = test::random_spin_batch(4, 32, 1);
  Eigen::MatrixXd derivs(6, 32);
  auto rng = make_stream(3, 0);
  for (int k = 0; k < 32; ++k) {
    for (int i = 0; i < 6; ++i) derivs(i, k) = standard_normal(rng);
  }
  const Eigen::VectorXd energies = Eigen::VectorXd::Constant(32, -7.7);
  const SrStatistics stats = accumulate_sr_statistics(derivs, energies);
  CHECK(stats.force.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sr statistics: non-finite input rejected with the sample index") {
  Eigen::MatrixXd derivs = Eigen::MatrixXd::Zero(2, 4);
  Eigen::VectorXd energies = Eigen::VectorXd::Zero(4);
  energies[2] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)accumulate_sr_statistics(derivs, energies);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("sample 2") != std::string::npos);
  }
}

namespace {

// Statistics with a prescribed covariance A (PSD) and force F.
SrStatistics synthetic_stats(const Eigen::MatrixXd& a, const Eigen::VectorXd& f) {
  const Eigen::Index p = a.rows();
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  REQUIRE(llt.info() == Eigen::Success);
  const Eigen::MatrixXd l = llt.matrixL();
  SrStatistics stats;
  stats.sample_count = 2 * p;
  // centered = sqrt(M/2) [L, -L] gives centered centered^T / M = A, zero row means
  stats.centered_derivatives.resize(p, 2 * p);
  stats.centered_derivatives << l, -l;
  stats.centered_derivatives *= std::sqrt(static_cast<double>(p));
  stats.mean_derivatives = Eigen::VectorXd::Zero(p);
  stats.force = f;
  stats.mean_energy = 0.0;
  stats.energy_variance = 1.0;
  return stats;
}

}  // namespace

TEST_CASE("sr_update: identity covariance gives a plain gradient step") {
  Eigen::VectorXd f(3);
  f << 1.0, -2.0, 0.5;
  const SrStatistics stats = synthetic_stats(Eigen::MatrixXd::Identity(3, 3), f);
  SrSolveInfo info;
  const Eigen::VectorXd updated =
      sr_update(Eigen::VectorXd::Zero(3), stats, 1.0, 1e-14, 3000, &info);
  CHECK((updated + f).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(info.dense);
  CHECK(info.residual < 1e-12);
}

TEST_CASE("sr_update: huge shift reduces to a vanishing SGD step") {
  Eigen::VectorXd f(3);
  f << 1.0, -2.0, 0.5;
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.3, 0.0, 0.3, 1.5, -0.2, 0.0, -0.2, 1.0;
  const SrStatistics stats = synthetic_stats(a, f);
  const double shift = 1e8;
  const Eigen::VectorXd updated =
      sr_update(Eigen::VectorXd::Zero(3), stats, 1.0, shift, 3000, nullptr);
  CHECK((updated + f / shift).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("sr_update: converges on a quadratic toy model") {
  Eigen::MatrixXd a(2, 2);
  a << 3.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd b(2);
  b << 1.0, -1.0;
  const Eigen::VectorXd minimizer = a.llt().solve(b);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  for (int it = 0; it < 100; ++it) {
    SrStatistics stats = synthetic_stats(a, a * theta - b);
    theta = sr_update(theta, stats, 0.8, 1e-3, 3000, nullptr);
  }
  CHECK((theta - minimizer).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sr_update: conjugate-gradient path matches the dense solve") {
  Eigen::MatrixXd a(4, 4);
  a.setIdentity();
  a(0, 1) = a(1, 0) = 0.4;
  a(2, 3) = a(3, 2) = -0.3;
  Eigen::VectorXd f(4);
  f << 0.3, -1.0, 2.0, 0.7;
  const SrStatistics stats = synthetic_stats(a, f);
  SrSolveInfo dense_info, cg_info;
  const Eigen::VectorXd dense =
      sr_update(Eigen::VectorXd::Zero(4), stats, 1.0, 1e-3, 3000, &dense_info);
  const Eigen::VectorXd cg =
      sr_update(Eigen::VectorXd::Zero(4), stats, 1.0, 1e-3, 0, &cg_info);
  CHECK(dense_info.dense);
  CHECK(!cg_info.dense);
  CHECK(cg_info.cg_iterations > 0);
  CHECK((dense - cg).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(cg_info.residual < 1e-8);
}

TEST_CASE("sr_update: dimension and shift validation") {
  const SrStatistics stats = synthetic_stats(Eigen::MatrixXd::Identity(2, 2),
                                             Eigen::VectorXd::Ones(2));
  CHECK_THROWS_AS((void)sr_update(Eigen::VectorXd::Zero(3), stats, 1.0, 1e-3, 3000, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sr_update(Eigen::VectorXd::Zero(2), stats, 1.0, 0.0, 3000, nullptr),
                  std::invalid_argument);
}

TEST_CASE("train: exactly representable single-spin state is a fixed point") {
  // uniform amplitudes solve N = 1, J = 0; zero RBM parameters represent it
  const auto model = make_ising_model(2.0, 0.0, 1.0, 1, true);
  const RbmAnsatz rbm(1, 2);
  SamplerConfig sampler;
  sampler.n_chains = 8;
  sampler.samples_per_iteration = 64;
  sampler.seed = 5;
  TrainOptions options;
  options.max_iterations = 3;
  options.learning_rate = {0.1, 0.5, 2, 1.0};
  const TrainResult result =
      train(model, rbm, Eigen::VectorXd::Zero(rbm.parameter_count()), sampler, options);
  CHECK(result.parameters.cwiseAbs().maxCoeff() < 1e-12);
  for (const auto& rec : result.trace) {
    CHECK(rec.energy == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("train: free-spin chain converges to the product state") {
  const auto model = make_ising_model(2.5, 0.0, 1.0, 6, true);
  const RbmAnsatz rbm(6, 12);
  SamplerConfig sampler;
  sampler.n_chains = 64;
  sampler.samples_per_iteration = 256;
  sampler.seed = 7;
  TrainOptions options;
  options.max_iterations = 60;
  options.learning_rate = {0.02, 0.2, 10, 0.995};
  options.diagonal_shift = {1e-2, 1e-3, 0};
  const TrainResult result =
      train(model, rbm, rbm.initial_parameters(1), sampler, options);
  CHECK(result.iterations_completed == 60);
  // exact ground energy is -N; check via the deterministic full-basis route
  const auto exact =
      exact_variational(model, make_batched_log_psi(rbm, result.parameters), 0.0);
  CHECK(std::abs(exact.energy - (-6.0)) / 6.0 < 5e-3);
  // stochastic monotonicity: smoothed energy decreases from start to finish
  const auto& trace = result.trace;
  double head = 0.0, tail = 0.0;
  for (int k = 0; k < 10; ++k) {
    head += trace[k].energy / 10.0;
    tail += trace[trace.size() - 1 - k].energy / 10.0;
  }
  CHECK(tail < head);
}

TEST_CASE("train: deterministic trace for a fixed seed") {
  const auto model = make_ising_model(2.0, -1.0, 1.0, 5, true);
  const RbmAnsatz rbm(5, 8);
  SamplerConfig sampler;
  sampler.n_chains = 16;
  sampler.samples_per_iteration = 64;
  sampler.seed = 9;
  TrainOptions options;
  options.max_iterations = 5;
  std::ostringstream trace_a, trace_b;
  TrainOptions options_a = options;
  options_a.trace_stream = &trace_a;
  TrainOptions options_b = options;
  options_b.trace_stream = &trace_b;
  const TrainResult a = train(model, rbm, rbm.initial_parameters(3), sampler, options_a);
  const TrainResult b = train(model, rbm, rbm.initial_parameters(3), sampler, options_b);
  CHECK(trace_a.str() == trace_b.str());
  CHECK((a.parameters - b.parameters).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train: budget of zero iterations reported") {
  const auto model = make_ising_model(2.0, -1.0, 1.0, 5, true);
  const RbmAnsatz rbm(5, 8);
  SamplerConfig sampler;
  sampler.n_chains = 8;
  sampler.samples_per_iteration = 32;
  sampler.seed = 2;
  TrainOptions options;
  options.max_iterations = 50;
  options.budget_seconds = 1e-9;
  const TrainResult result = train(model, rbm, rbm.initial_parameters(1), sampler, options);
  CHECK(result.budget_exhausted);
  CHECK(result.iterations_completed == 0);
}

TEST_CASE("train: trace rows carry schedules and acceptance") {
  const auto model = make_ising_model(2.0, -1.0, 1.0, 4, true);
  const RbmAnsatz rbm(4, 6);
  SamplerConfig sampler;
  sampler.n_chains = 8;
  sampler.samples_per_iteration = 32;
  sampler.seed = 4;
  TrainOptions options;
  options.max_iterations = 4;
  std::ostringstream acceptance;
  options.acceptance_stream = &acceptance;
  const TrainResult result = train(model, rbm, rbm.initial_parameters(2), sampler, options);
  REQUIRE(result.trace.size() == 4);
  CHECK(result.trace[0].learning_rate == doctest::Approx(0.1));
  CHECK(result.trace[0].diagonal_shift == doctest::Approx(1e-2));
  for (const auto& rec : result.trace) {
    CHECK(rec.acceptance_local >= 0.0);
    CHECK(rec.acceptance_local <= 1.0);
    CHECK(rec.solver_residual < 1e-6);
  }
  // two move-type rows per iteration
  int lines = 0;
  for (char c : acceptance.str()) lines += c == '\n';
  CHECK(lines == 8);
}
