#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lrvmc/fssa.hpp"
#include "lrvmc/rng.hpp"
#include "testutil.hpp"

using namespace lrvmc;

namespace {

double master_curve(double x) { return 1.0 / (1.0 + x * x); }

// Dataset drawn exactly from the scaling form with the given parameters.
ScalingDataset synthetic_dataset(double j_c, double nu, double beta, double noise,
                                 std::uint64_t seed, double j_lo = 0.8, double j_hi = 1.2,
                                 int points = 25) {
  ScalingDataset data;
  auto rng = make_stream(seed, 0);
  for (double n : {50.0, 100.0, 150.0}) {
    for (int k = 0; k < points; ++k) {
      const double j = j_lo + (j_hi - j_lo) * k / (points - 1);
      const double x = std::pow(n, 1.0 / nu) * (j - j_c);
      double value = std::pow(n, -2.0 * beta / nu) * master_curve(x);
      double error = std::max(noise * std::abs(value), 1e-12);
      if (noise > 0.0) value += error * standard_normal(rng);
      data.points.push_back({n, j, value, error});
    }
  }
  return data;
}

}  // namespace

TEST_CASE("scale_transform: pivot and exponent limits") {
  const ScalingPoint rec{100.0, 1.0, 0.5, 0.01};
  const ScaledPoint at_jc = scale_transform(rec, 1.0, 1.3, 0.2);
  CHECK(at_jc.x == 0.0);
  const ScaledPoint no_beta = scale_transform(rec, 0.7, 1.3, 0.0);
  CHECK(no_beta.y == rec.value);
  CHECK(no_beta.y_error == rec.error);
  CHECK_THROWS_AS((void)scale_transform(rec, 1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("scale_transform: synthetic records land on the master curve") {
  const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.0, 0);
  for (const auto& rec : data.points) {
    const ScaledPoint sp = scale_transform(rec, 1.0, 1.0, 0.125);
    CHECK(sp.y == doctest::Approx(master_curve(sp.x)).epsilon(1e-12));
  }
}

TEST_CASE("dataset validation") {
  ScalingDataset one_size;
  for (int k = 0; k < 8; ++k) one_size.points.push_back({64.0, 0.1 * k, 1.0, 0.1});
  CHECK_THROWS_AS(one_size.validate(), std::invalid_argument);

  ScalingDataset bad_errors = synthetic_dataset(1.0, 1.0, 0.1, 0.01, 1);
  bad_errors.points[3].error = 0.0;
  CHECK_THROWS_AS(bad_errors.validate(), std::invalid_argument);

  ScalingDataset sparse;
  for (double n : {8.0, 16.0, 32.0}) {
    for (int k = 0; k < 4; ++k) sparse.points.push_back({n, 0.1 * k, 1.0, 0.1});
  }
  CHECK_THROWS_AS(sparse.validate(), std::invalid_argument);
}

TEST_CASE("collapse_quality: exact linear master curve collapses to zero") {
  // a linear master curve makes the local linear fit exact
  ScalingDataset data;
  for (double n : {50.0, 100.0, 150.0}) {
    for (int k = 0; k < 20; ++k) {
      const double j = 0.8 + 0.4 * k / 19.0;
      const double x = n * (j - 1.0);
      data.points.push_back({n, j, 0.3 + 0.02 * x, 0.05});
    }
  }
  CHECK(collapse_quality(data, 1.0, 1.0, 0.0) < 1e-18);
}

TEST_CASE("collapse_quality: unit noise gives a reduced chi-square near one") {
  double mean_quality = 0.0;
  const int reps = 10;
  for (int rep = 0; rep < reps; ++rep) {
    ScalingDataset data;
    auto rng = make_stream(100 + rep, 0);
    for (double n : {50.0, 100.0, 150.0}) {
      for (int k = 0; k < 40; ++k) {
        const double j = 0.9 + 0.2 * k / 39.0;
        const double x = n * (j - 1.0);
        data.points.push_back({n, j, master_curve(x) + standard_normal(rng), 1.0});
      }
    }
    const double q = collapse_quality(data, 1.0, 1.0, 0.0);
    CHECK(q > 0.5);
    CHECK(q < 1.7);
    mean_quality += q / reps;
  }
  CHECK(mean_quality > 0.75);
  CHECK(mean_quality < 1.35);
}

TEST_CASE("collapse_quality: wrong exponent degrades the collapse") {
  const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 7);
  const double good = collapse_quality(data, 1.0, 1.0, 0.125);
  const double bad = collapse_quality(data, 1.0, 3.0, 0.125);
  CHECK(bad > good);
}

TEST_CASE("collapse_quality: perturbations never beat the generating parameters") {
  const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 8);
  const double base = collapse_quality(data, 1.0, 1.0, 0.125);
  auto rng = make_stream(17, 0);
  for (int k = 0; k < 10; ++k) {
    double j_c = 1.0, nu = 1.0, beta = 0.125;
    const int coord = uniform_index(rng, 3);
    const double factor = uniform01(rng) < 0.5 ? 0.8 : 1.2;
    if (coord == 0) j_c *= factor;
    if (coord == 1) nu *= factor;
    if (coord == 2) beta *= factor;
    CHECK(collapse_quality(data, j_c, nu, beta) >= base);
  }
}

TEST_CASE("collapse_quality: disjoint scaled ranges raise a named error") {
  ScalingDataset data;
  for (int g = 0; g < 3; ++g) {
    const double n = 10.0 * (g + 1);
    for (int k = 0; k < 6; ++k) {
      data.points.push_back({n, 100.0 * g + 0.1 * k, 1.0, 0.1});
    }
  }
  try {
    (void)collapse_quality(data, 0.0, 1.0, 0.0);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("overlap") != std::string::npos);
    CHECK(std::string(e.what()).find("N=") != std::string::npos);
  }
}

TEST_CASE("fit_critical: recovers synthetic parameters over ten repetitions") {
  for (int rep = 0; rep < 10; ++rep) {
    const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 200 + rep);
    FssaOptions options;
    options.j_c = 0.93;
    options.nu = 1.25;
    options.beta = 0.2;
    const CriticalFit fit = fit_critical(data, options);
    CHECK(std::abs(fit.j_c - 1.0) < 0.01);
    CHECK(std::abs(fit.nu - 1.0) < 0.05);
    CHECK(std::abs(fit.beta - 0.125) < 0.05 * 0.125 + 0.02);
  }
}

TEST_CASE("fit_critical: errors are finite and the quality is reported") {
  const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 300);
  FssaOptions options;
  options.j_c = 0.9;
  options.nu = 1.2;
  options.beta = 0.15;
  const CriticalFit fit = fit_critical(data, options);
  CHECK(std::isfinite(fit.j_c_error));
  CHECK(fit.j_c_error > 0.0);
  CHECK(std::isfinite(fit.quality));
  CHECK(fit.evaluations > 0);
}

TEST_CASE("fit_critical: invariant under record reordering") {
  ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 400);
  FssaOptions options;
  options.j_c = 0.95;
  options.nu = 1.1;
  options.beta = 0.1;
  const CriticalFit a = fit_critical(data, options);
  std::reverse(data.points.begin(), data.points.end());
  const CriticalFit b = fit_critical(data, options);
  CHECK(a.j_c == doctest::Approx(b.j_c).epsilon(1e-10));
  CHECK(a.nu == doctest::Approx(b.nu).epsilon(1e-10));
}

TEST_CASE("fit_critical: single-size dataset rejected") {
  ScalingDataset data;
  for (int k = 0; k < 8; ++k) data.points.push_back({64.0, 0.1 * k, 1.0, 0.1});
  FssaOptions options;
  CHECK_THROWS_AS((void)fit_critical(data, options), std::invalid_argument);
}

TEST_CASE("fit_critical: bootstrap errors available behind the option") {
  const ScalingDataset data = synthetic_dataset(1.0, 1.0, 0.125, 0.01, 500);
  FssaOptions options;
  options.j_c = 0.97;
  options.nu = 1.05;
  options.beta = 0.13;
  options.bootstrap_samples = 8;
  const CriticalFit fit = fit_critical(data, options);
  CHECK(fit.j_c_error > 0.0);
  CHECK(fit.nu_error > 0.0);
}

TEST_CASE("savitzky_golay: reproduces low-order polynomials in the interior") {
  std::vector<double> series(41);
  for (int i = 0; i < 41; ++i) {
    const double x = 0.1 * i;
    series[i] = 2.0 - 0.7 * x + 0.3 * x * x;
  }
  const std::vector<double> smooth = savitzky_golay(series, 7, 2);
  for (int i = 3; i < 38; ++i) {
    CHECK(std::abs(smooth[i] - series[i]) < 1e-10);
  }
}

TEST_CASE("savitzky_golay: constants unchanged everywhere") {
  const std::vector<double> series(20, 4.2);
  const std::vector<double> smooth = savitzky_golay(series, 5, 1);
  for (double v : smooth) CHECK(v == doctest::Approx(4.2).epsilon(1e-13));
}

TEST_CASE("savitzky_golay: reduces noise on a sine") {
  auto rng = make_stream(9, 0);
  const int len = 200;
  std::vector<double> clean(len), noisy(len);
  for (int i = 0; i < len; ++i) {
    clean[i] = std::sin(0.08 * i);
    noisy[i] = clean[i] + 0.2 * standard_normal(rng);
  }
  const std::vector<double> smooth = savitzky_golay(noisy, 7, 2);
  double mse_in = 0.0, mse_out = 0.0;
  for (int i = 0; i < len; ++i) {
    mse_in += (noisy[i] - clean[i]) * (noisy[i] - clean[i]) / len;
    mse_out += (smooth[i] - clean[i]) * (smooth[i] - clean[i]) / len;
  }
  CHECK(mse_out < mse_in);
}

TEST_CASE("savitzky_golay: window validation") {
  const std::vector<double> series(10, 1.0);
  CHECK_THROWS_AS((void)savitzky_golay(series, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)savitzky_golay(series, 3, 3), std::invalid_argument);
}

TEST_CASE("derived critical quantities: tabulated alpha = 6 rows") {
  constexpr double kZeta6 = 1.0173430619844491397;
  const double kac = 1.0 + 2.0 * kZeta6;
  const auto fm = derived_critical_quantities(-2.963, kac);
  CHECK(fm.h_tilde_c == doctest::Approx(1.0242).epsilon(5e-4));
  CHECK(fm.theta_c == doctest::Approx(0.7734).epsilon(5e-4));
  const auto afm = derived_critical_quantities(3.143, kac);
  CHECK(afm.h_tilde_c == doctest::Approx(0.9655).epsilon(5e-4));
  const auto unit = derived_critical_quantities(-1.0, 1.0);
  CHECK(unit.theta_c == doctest::Approx(std::atan(1.0)).epsilon(1e-14));
  CHECK_THROWS_AS((void)derived_critical_quantities(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)derived_critical_quantities(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("from_csv: round trip and malformed input diagnostics") {
  const auto dir = test::scratch_dir("fssa_csv");
  const auto good = dir / "good.csv";
  {
    std::ofstream out(good);
    out << "N,J,value,error\n";
    out << "8,1.5,0.25,0.01\n";
    out << "16,1.5,0.21,0.01\n";
  }
  const ScalingDataset data = ScalingDataset::from_csv(good);
  REQUIRE(data.points.size() == 2);
  CHECK(data.points[1].size == 16.0);
  CHECK(data.points[1].value == 0.21);

  const auto bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "N,J,value,error\n";
    out << "8,1.5,0.25,0.01\n";
    out << "16,oops,0.21,0.01\n";
  }
  try {
    (void)ScalingDataset::from_csv(bad);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const auto bad_header = dir / "badheader.csv";
  {
    std::ofstream out(bad_header);
    out << "N,J,val\n";
  }
  CHECK_THROWS_AS((void)ScalingDataset::from_csv(bad_header), std::runtime_error);
}
