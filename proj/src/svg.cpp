#include "lrvmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lrvmc {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  double scale(double v, double pix_lo, double pix_hi) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

Axis fit_axis(const std::vector<double>& values) {
  Axis ax;
  ax.lo = std::numeric_limits<double>::infinity();
  ax.hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    ax.lo = std::min(ax.lo, v);
    ax.hi = std::max(ax.hi, v);
  }
  if (!(ax.lo < ax.hi)) {
    ax.lo = std::isfinite(ax.lo) ? ax.lo - 0.5 : 0.0;
    ax.hi = ax.lo + 1.0;
  }
  const double pad = 0.04 * (ax.hi - ax.lo);
  ax.lo -= pad;
  ax.hi += pad;
  return ax;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void open_svg(std::ofstream& out, const std::filesystem::path& file) {
  out.open(file);
  if (!out) throw std::runtime_error("svg: cannot write " + file.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
      << kHeight << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
}

void draw_frame(std::ofstream& out, const Axis& xa, const Axis& ya,
                const std::string& x_label, const std::string& y_label,
                const std::string& title) {
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<rect x='" << x0 << "' y='" << y1 << "' width='" << (x1 - x0) << "' height='"
      << (y0 - y1) << "' fill='none' stroke='black'/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double tx = xa.lo + k * (xa.hi - xa.lo) / 4.0;
    const double px = xa.scale(tx, x0, x1);
    out << "<line x1='" << px << "' y1='" << y0 << "' x2='" << px << "' y2='" << (y0 + 5)
        << "' stroke='black'/>\n"
        << "<text x='" << px << "' y='" << (y0 + 18)
        << "' font-size='11' text-anchor='middle'>" << fmt(tx) << "</text>\n";
    const double ty = ya.lo + k * (ya.hi - ya.lo) / 4.0;
    const double py = ya.scale(ty, y0, y1);
    out << "<line x1='" << (x0 - 5) << "' y1='" << py << "' x2='" << x0 << "' y2='" << py
        << "' stroke='black'/>\n"
        << "<text x='" << (x0 - 8) << "' y='" << (py + 4)
        << "' font-size='11' text-anchor='end'>" << fmt(ty) << "</text>\n";
  }
  out << "<text x='" << (x0 + x1) / 2 << "' y='" << (kHeight - 12)
      << "' font-size='13' text-anchor='middle'>" << x_label << "</text>\n"
      << "<text x='16' y='" << (y0 + y1) / 2
      << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 " << (y0 + y1) / 2
      << ")'>" << y_label << "</text>\n"
      << "<text x='" << (x0 + x1) / 2 << "' y='20' font-size='14' text-anchor='middle'>"
      << title << "</text>\n";
}

// Blue-white-red-free sequential ramp (dark blue -> yellow).
std::string colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(255 * std::clamp(1.5 * t - 0.25, 0.0, 1.0));
  const int g = static_cast<int>(255 * std::clamp(1.2 * t, 0.0, 1.0) * 0.9);
  const int b = static_cast<int>(255 * std::clamp(1.0 - 1.3 * t, 0.1, 1.0));
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace

void write_heatmap_svg(const std::filesystem::path& file, const std::vector<double>& xs,
                       const std::vector<double>& ys, const std::vector<double>& values,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title) {
  if (values.size() != xs.size() * ys.size()) {
    throw std::invalid_argument("heatmap: values size must equal xs * ys");
  }
  std::ofstream out;
  open_svg(out, file);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo < hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  const double cw = static_cast<double>(x1 - x0) / xs.size();
  const double ch = static_cast<double>(y0 - y1) / ys.size();
  for (std::size_t r = 0; r < ys.size(); ++r) {
    for (std::size_t c = 0; c < xs.size(); ++c) {
      const double v = values[r * xs.size() + c];
      const std::string color =
          std::isfinite(v) ? colormap((v - lo) / (hi - lo)) : std::string("rgb(220,220,220)");
      out << "<rect x='" << (x0 + c * cw) << "' y='" << (y0 - (r + 1) * ch) << "' width='"
          << cw + 0.5 << "' height='" << ch + 0.5 << "' fill='" << color << "'/>\n";
    }
  }
  Axis xa{xs.front(), xs.back()}, ya{ys.front(), ys.back()};
  draw_frame(out, xa, ya, x_label, y_label, title + "  [" + fmt(lo) + ", " + fmt(hi) + "]");
  out << "</svg>\n";
}

void write_line_plot_svg(const std::filesystem::path& file,
                         const std::vector<PlotSeries>& series, const std::string& x_label,
                         const std::string& y_label, const std::string& title, bool log_y) {
  std::ofstream out;
  open_svg(out, file);
  std::vector<double> all_x, all_y;
  for (const auto& s : series) {
    all_x.insert(all_x.end(), s.x.begin(), s.x.end());
    for (double v : s.y) {
      all_y.push_back(log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN())
                            : v);
    }
  }
  const Axis xa = fit_axis(all_x), ya = fit_axis(all_y);
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  draw_frame(out, xa, ya, x_label, log_y ? "log10 " + y_label : y_label, title);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    out << "<polyline fill='none' stroke='" << kPalette[k % 8] << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      double y = log_y ? (s.y[i] > 0 ? std::log10(s.y[i]) : std::nan("")) : s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      out << xa.scale(s.x[i], x0, x1) << ',' << ya.scale(y, y0, y1) << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << (x1 - 150) << "' y='" << (y1 + 16 + 14 * k) << "' font-size='12' fill='"
        << kPalette[k % 8] << "'>" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_scatter_svg(const std::filesystem::path& file, const std::vector<PlotSeries>& groups,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title) {
  std::ofstream out;
  open_svg(out, file);
  std::vector<double> all_x, all_y;
  for (const auto& g : groups) {
    all_x.insert(all_x.end(), g.x.begin(), g.x.end());
    all_y.insert(all_y.end(), g.y.begin(), g.y.end());
  }
  const Axis xa = fit_axis(all_x), ya = fit_axis(all_y);
  const int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  draw_frame(out, xa, ya, x_label, y_label, title);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const auto& g = groups[k];
    for (std::size_t i = 0; i < g.x.size() && i < g.y.size(); ++i) {
      if (!std::isfinite(g.x[i]) || !std::isfinite(g.y[i])) continue;
      out << "<circle cx='" << xa.scale(g.x[i], x0, x1) << "' cy='" << ya.scale(g.y[i], y0, y1)
          << "' r='3' fill='" << kPalette[k % 8] << "' fill-opacity='0.7'/>\n";
    }
    out << "<text x='" << (x1 - 150) << "' y='" << (y1 + 16 + 14 * k) << "' font-size='12' fill='"
        << kPalette[k % 8] << "'>" << g.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lrvmc
