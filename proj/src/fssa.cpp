#include "lrvmc/fssa.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lrvmc/rng.hpp"

namespace lrvmc {

void ScalingDataset::validate() const {
  std::map<double, int> per_size;
  for (const auto& p : points) {
    if (!(p.error > 0.0)) {
      throw std::invalid_argument("scaling dataset: errors must be positive");
    }
    if (!(p.size > 0.0)) throw std::invalid_argument("scaling dataset: sizes must be positive");
    ++per_size[p.size];
  }
  if (per_size.size() < 3) {
    throw std::invalid_argument("scaling dataset: need >= 3 distinct sizes, have " +
                                std::to_string(per_size.size()));
  }
  for (const auto& [size, count] : per_size) {
    if (count < 5) {
      throw std::invalid_argument("scaling dataset: size " + std::to_string(size) +
                                  " has only " + std::to_string(count) +
                                  " points (need >= 5)");
    }
  }
}

ScalingDataset ScalingDataset::restricted(double j_min, double j_max) const {
  ScalingDataset out;
  for (const auto& p : points) {
    if (p.coupling >= j_min && p.coupling <= j_max) out.points.push_back(p);
  }
  return out;
}

std::vector<double> ScalingDataset::distinct_sizes() const {
  std::vector<double> sizes;
  for (const auto& p : points) sizes.push_back(p.size);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return sizes;
}

ScalingDataset ScalingDataset::from_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("fssa: cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("fssa: empty file " + file.string());
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return std::isspace(c); }),
            s.end());
    return s;
  };
  if (strip(line) != "N,J,value,error") {
    throw std::runtime_error("fssa: line 1: expected header 'N,J,value,error', got '" + line +
                             "'");
  }
  ScalingDataset data;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::stringstream ss(line);
    std::string field;
    double values[4];
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error("fssa: line " + std::to_string(line_no) +
                                 ": expected 4 comma-separated fields");
      }
      try {
        values[k] = std::stod(field);
      } catch (const std::exception&) {
        throw std::runtime_error("fssa: line " + std::to_string(line_no) +
                                 ": cannot parse '" + field + "'");
      }
    }
    data.points.push_back({values[0], values[1], values[2], values[3]});
  }
  return data;
}

ScaledPoint scale_transform(const ScalingPoint& record, double j_c, double nu, double beta) {
  if (nu == 0.0) throw std::invalid_argument("scale_transform: nu must be nonzero");
  ScaledPoint out;
  const double y_factor = std::pow(record.size, 2.0 * beta / nu);
  out.x = std::pow(record.size, 1.0 / nu) * (record.coupling - j_c);
  out.y = record.value * y_factor;
  out.y_error = record.error * y_factor;
  out.size = record.size;
  return out;
}

namespace {

struct SizeGroup {
  double size = 0.0;
  std::vector<ScaledPoint> pts;  // sorted by x
};

std::vector<SizeGroup> transform_grouped(const ScalingDataset& dataset, double j_c, double nu,
                                         double beta) {
  std::map<double, SizeGroup> groups;
  for (const auto& rec : dataset.points) {
    SizeGroup& g = groups[rec.size];
    g.size = rec.size;
    g.pts.push_back(scale_transform(rec, j_c, nu, beta));
  }
  std::vector<SizeGroup> out;
  for (auto& [size, g] : groups) {
    std::sort(g.pts.begin(), g.pts.end(),
              [](const ScaledPoint& a, const ScaledPoint& b) { return a.x < b.x; });
    out.push_back(std::move(g));
  }
  return out;
}

double quality_impl(const ScalingDataset& dataset, double j_c, double nu, double beta,
                    int* term_count) {
  const auto groups = transform_grouped(dataset, j_c, nu, beta);
  double chi2 = 0.0;
  int count = 0;
  std::vector<const ScaledPoint*> selected;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const ScaledPoint& point : groups[g].pts) {
      selected.clear();
      for (std::size_t o = 0; o < groups.size(); ++o) {
        if (o == g) continue;
        const auto& pts = groups[o].pts;
        if (point.x < pts.front().x || point.x > pts.back().x) continue;
        // bracketing pair in the sorted x of the other size
        auto it = std::lower_bound(pts.begin(), pts.end(), point.x,
                                   [](const ScaledPoint& p, double x) { return p.x < x; });
        if (it == pts.begin()) {
          selected.push_back(&*it);
        } else if (it == pts.end()) {
          selected.push_back(&*(it - 1));
        } else {
          selected.push_back(&*(it - 1));
          selected.push_back(&*it);
        }
      }
      if (selected.empty()) continue;

      // Weighted local linear fit through the selected master-curve points.
      double kw = 0.0, kx = 0.0, ky = 0.0, kxx = 0.0, kxy = 0.0;
      for (const ScaledPoint* p : selected) {
        const double w = 1.0 / std::max(p->y_error * p->y_error, 1e-24);
        kw += w;
        kx += w * p->x;
        ky += w * p->y;
        kxx += w * p->x * p->x;
        kxy += w * p->x * p->y;
      }
      const double det = kw * kxx - kx * kx;
      double y_fit, var_fit;
      if (selected.size() >= 2 && std::abs(det) > 1e-12 * kw * kxx) {
        y_fit = (kxx * ky - kx * kxy) / det + point.x * (kw * kxy - kx * ky) / det;
        var_fit = (kxx - 2.0 * point.x * kx + point.x * point.x * kw) / det;
      } else {
        y_fit = ky / kw;  // degenerate x spread: weighted mean
        var_fit = 1.0 / kw;
      }
      const double denom =
          std::max(point.y_error * point.y_error + var_fit, 1e-24);
      chi2 += (point.y - y_fit) * (point.y - y_fit) / denom;
      ++count;
    }
  }
  if (count == 0) {
    std::string msg = "collapse_quality: no overlap between the scaled x-ranges:";
    for (const auto& g : groups) {
      msg += " N=" + std::to_string(g.size) + " spans [" + std::to_string(g.pts.front().x) +
             ", " + std::to_string(g.pts.back().x) + "];";
    }
    throw std::runtime_error(msg);
  }
  if (term_count) *term_count = count;
  return chi2 / count;
}

// Standard Nelder-Mead on a 3-parameter objective, restarted once at the best
// vertex.
struct SimplexResult {
  Eigen::Vector3d best;
  double value = 0.0;
  int evaluations = 0;
};

template <typename F>
SimplexResult nelder_mead(const F& f, Eigen::Vector3d x0, Eigen::Vector3d steps,
                          int max_evaluations) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  int evals = 0;
  auto eval = [&](const Eigen::Vector3d& x) {
    ++evals;
    return f(x);
  };

  std::array<Eigen::Vector3d, 4> xs;
  std::array<double, 4> fs;
  auto init_simplex = [&](const Eigen::Vector3d& center, const Eigen::Vector3d& scale) {
    xs[0] = center;
    fs[0] = eval(xs[0]);
    for (int i = 0; i < 3; ++i) {
      xs[i + 1] = center;
      xs[i + 1][i] += scale[i];
      fs[i + 1] = eval(xs[i + 1]);
    }
  };
  auto order = [&]() {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::array<Eigen::Vector3d, 4> xs2;
    std::array<double, 4> fs2;
    for (int i = 0; i < 4; ++i) {
      xs2[i] = xs[idx[i]];
      fs2[i] = fs[idx[i]];
    }
    xs = xs2;
    fs = fs2;
  };

  for (int round = 0; round < 2; ++round) {
    init_simplex(round == 0 ? x0 : xs[0], round == 0 ? steps : (steps * 0.25).eval());
    while (evals < max_evaluations) {
      order();
      const double spread = std::abs(fs[3] - fs[0]);
      double diam = 0.0;
      for (int i = 1; i < 4; ++i) diam = std::max(diam, (xs[i] - xs[0]).norm());
      if (spread < 1e-12 * (1.0 + std::abs(fs[0])) && diam < 1e-9) break;

      const Eigen::Vector3d centroid = (xs[0] + xs[1] + xs[2]) / 3.0;
      const Eigen::Vector3d xr = centroid + kReflect * (centroid - xs[3]);
      const double fr = eval(xr);
      if (fr < fs[0]) {
        const Eigen::Vector3d xe = centroid + kExpand * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[3] = xe;
          fs[3] = fe;
        } else {
          xs[3] = xr;
          fs[3] = fr;
        }
      } else if (fr < fs[2]) {
        xs[3] = xr;
        fs[3] = fr;
      } else {
        const Eigen::Vector3d xc = centroid + kContract * (xs[3] - centroid);
        const double fc = eval(xc);
        if (fc < fs[3]) {
          xs[3] = xc;
          fs[3] = fc;
        } else {
          for (int i = 1; i < 4; ++i) {
            xs[i] = xs[0] + kShrink * (xs[i] - xs[0]);
            fs[i] = eval(xs[i]);
          }
        }
      }
    }
    order();
  }
  return {xs[0], fs[0], evals};
}

}  // namespace

double collapse_quality(const ScalingDataset& dataset, double j_c, double nu, double beta) {
  return quality_impl(dataset, j_c, nu, beta, nullptr);
}

CriticalFit fit_critical(const ScalingDataset& dataset, const FssaOptions& options) {
  if (!std::isfinite(options.j_c) || !std::isfinite(options.nu) ||
      !std::isfinite(options.beta)) {
    throw std::invalid_argument("fit_critical: initial guess must be finite");
  }
  const ScalingDataset data = dataset.restricted(options.window[0], options.window[1]);
  data.validate();

  auto objective = [&](const Eigen::Vector3d& x) {
    const double nu = x[1];
    if (!(nu > 0.02 && nu < 50.0) || std::abs(x[2]) > 10.0) {
      return 1e12 * (1.0 + x.cwiseAbs().sum());
    }
    try {
      return quality_impl(data, x[0], nu, x[2], nullptr);
    } catch (const std::runtime_error&) {
      return 1e12;  // no x-overlap at these parameters
    }
  };

  const Eigen::Vector3d x0(options.j_c, options.nu, options.beta);
  const Eigen::Vector3d steps(0.05 * std::max(std::abs(options.j_c), 0.5),
                              0.2 * options.nu, std::max(0.05, 0.2 * options.beta));
  const SimplexResult best = nelder_mead(objective, x0, steps, options.max_evaluations);

  CriticalFit fit;
  fit.j_c = best.best[0];
  fit.nu = best.best[1];
  fit.beta = best.best[2];
  fit.window = options.window;
  fit.evaluations = best.evaluations;
  int term_count = 0;
  fit.quality = quality_impl(data, fit.j_c, fit.nu, fit.beta, &term_count);

  if (options.bootstrap_samples > 0) {
    auto rng = make_stream(options.bootstrap_seed, 0);
    Eigen::MatrixXd results(3, options.bootstrap_samples);
    for (int b = 0; b < options.bootstrap_samples; ++b) {
      ScalingDataset resampled = data;
      for (auto& p : resampled.points) p.value += p.error * standard_normal(rng);
      auto obj_b = [&](const Eigen::Vector3d& x) {
        const double nu = x[1];
        if (!(nu > 0.02 && nu < 50.0) || std::abs(x[2]) > 10.0) return 1e12;
        try {
          return quality_impl(resampled, x[0], nu, x[2], nullptr);
        } catch (const std::runtime_error&) {
          return 1e12;
        }
      };
      const SimplexResult rb = nelder_mead(obj_b, best.best, (steps * 0.5).eval(), 4000);
      results.col(b) = rb.best;
    }
    const Eigen::Vector3d mean = results.rowwise().mean();
    Eigen::Vector3d sd;
    for (int i = 0; i < 3; ++i) {
      sd[i] = std::sqrt((results.row(i).array() - mean[i]).square().sum() /
                        std::max(1, options.bootstrap_samples - 1));
    }
    fit.j_c_error = sd[0];
    fit.nu_error = sd[1];
    fit.beta_error = sd[2];
    return fit;
  }

  // Curvature-based 1-sigma errors: chi^2 = count * quality rises by 1 at
  // delta^T (count/2 H) delta = 1, H the Hessian of the quality.
  Eigen::Matrix3d hess;
  const Eigen::Vector3d h(1e-3 * std::max(std::abs(fit.j_c), 0.01),
                          1e-3 * std::max(fit.nu, 0.01),
                          1e-3 * std::max(std::abs(fit.beta), 0.01));
  const Eigen::Vector3d center(fit.j_c, fit.nu, fit.beta);
  auto q_at = [&](const Eigen::Vector3d& x) { return objective(x); };
  const double f0 = fit.quality;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Eigen::Vector3d pp = center, pm = center, mp = center, mm = center;
      pp[i] += h[i];
      pp[j] += h[j];
      pm[i] += h[i];
      pm[j] -= h[j];
      mp[i] -= h[i];
      mp[j] += h[j];
      mm[i] -= h[i];
      mm[j] -= h[j];
      if (i == j) {
        Eigen::Vector3d xp = center, xm = center;
        xp[i] += h[i];
        xm[i] -= h[i];
        hess(i, i) = (q_at(xp) - 2.0 * f0 + q_at(xm)) / (h[i] * h[i]);
      } else {
        hess(i, j) = hess(j, i) =
            (q_at(pp) - q_at(pm) - q_at(mp) + q_at(mm)) / (4.0 * h[i] * h[j]);
      }
    }
  }
  const Eigen::Matrix3d scaled = 0.5 * term_count * hess;
  const Eigen::LLT<Eigen::Matrix3d> llt(scaled);
  if (llt.info() == Eigen::Success) {
    const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
    fit.j_c_error = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.nu_error = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.beta_error = std::sqrt(std::max(0.0, cov(2, 2)));
  } else {
    for (int i = 0; i < 3; ++i) {
      const double d = scaled(i, i);
      const double err = d > 0.0 ? std::sqrt(1.0 / d) : std::numeric_limits<double>::quiet_NaN();
      if (i == 0) fit.j_c_error = err;
      if (i == 1) fit.nu_error = err;
      if (i == 2) fit.beta_error = err;
    }
  }
  return fit;
}

std::vector<double> savitzky_golay(const std::vector<double>& series, int window,
                                   int poly_order) {
  if (window <= poly_order || window % 2 == 0 || poly_order < 0) {
    throw std::invalid_argument("savitzky_golay: need odd window > poly_order >= 0");
  }
  const int n = static_cast<int>(series.size());
  const int half = window / 2;
  std::vector<double> out(series.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    const int m = hi - lo + 1;
    const int deg = std::min(poly_order, m - 1);
    Eigen::MatrixXd design(m, deg + 1);
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < m; ++r) {
      const double x = static_cast<double>(lo + r - i);
      double powx = 1.0;
      for (int c = 0; c <= deg; ++c) {
        design(r, c) = powx;
        powx *= x;
      }
      rhs[r] = series[lo + r];
    }
    const Eigen::VectorXd coeff = design.colPivHouseholderQr().solve(rhs);
    out[i] = coeff[0];  // fitted value at the window center
  }
  return out;
}

DerivedCriticalQuantities derived_critical_quantities(double j_c, double kac_factor) {
  if (!(kac_factor > 0.0)) {
    throw std::invalid_argument("derived_critical_quantities: kac factor must be positive");
  }
  if (j_c == 0.0) throw std::invalid_argument("derived_critical_quantities: J_c must be nonzero");
  DerivedCriticalQuantities out;
  out.j_tilde_c = std::abs(j_c) / kac_factor;
  out.h_tilde_c = 1.0 / out.j_tilde_c;
  out.theta_c = std::atan(1.0 / out.h_tilde_c);
  return out;
}

}  // namespace lrvmc
