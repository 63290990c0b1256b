#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace lrvmc {

struct ScalingPoint {
  double size = 0.0;   // N
  double coupling = 0.0;  // J
  double value = 0.0;  // <m^2>
  double error = 0.0;  // > 0
};

// Records grouped by size; needs >= 3 distinct sizes, >= 5 J points per size,
// and strictly positive errors.
struct ScalingDataset {
  std::vector<ScalingPoint> points;

  void validate() const;
  ScalingDataset restricted(double j_min, double j_max) const;
  std::vector<double> distinct_sizes() const;

  // CSV with header N,J,value,error; parse failures name the line.
  static ScalingDataset from_csv(const std::filesystem::path& file);
};

struct ScaledPoint {
  double x = 0.0;  // N^{1/nu} (J - J_c)
  double y = 0.0;  // value * N^{2 beta / nu}
  double y_error = 0.0;
  double size = 0.0;
};

ScaledPoint scale_transform(const ScalingPoint& record, double j_c, double nu, double beta);

// Master-curve quality: every transformed point is compared against the local
// weighted linear fit through the bracketing points of the other sizes,
// normalized by the combined variances; the reduced chi-square over all
// comparable points is ~1 for a statistically perfect collapse.
double collapse_quality(const ScalingDataset& dataset, double j_c, double nu, double beta);

struct CriticalFit {
  double j_c = 0.0, nu = 0.0, beta = 0.0;
  double j_c_error = 0.0, nu_error = 0.0, beta_error = 0.0;
  double quality = 0.0;
  std::array<double, 2> window = {-std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()};
  int evaluations = 0;
};

struct FssaOptions {
  double j_c = 1.0, nu = 1.0, beta = 0.1;  // initial guess
  std::array<double, 2> window = {-std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()};
  int max_evaluations = 20000;
  int bootstrap_samples = 0;  // 0: curvature-based errors only
  std::uint64_t bootstrap_seed = 7;
};

// Nelder-Mead minimization of collapse_quality over (J_c, nu, beta) inside the
// window, restarted once at the best vertex; uncertainties from the curvature
// of the quality function at the optimum (bootstrap optional).
CriticalFit fit_critical(const ScalingDataset& dataset, const FssaOptions& options);

// Local least-squares polynomial smoothing with window truncation at the
// edges. window must be odd and larger than poly_order.
std::vector<double> savitzky_golay(const std::vector<double>& series, int window,
                                   int poly_order);

struct DerivedCriticalQuantities {
  double j_tilde_c = 0.0;  // |J_c| / kac_factor
  double h_tilde_c = 0.0;  // 1 / j_tilde_c
  double theta_c = 0.0;    // arctan(1 / h_tilde_c)
};

DerivedCriticalQuantities derived_critical_quantities(double j_c, double kac_factor);

}  // namespace lrvmc
