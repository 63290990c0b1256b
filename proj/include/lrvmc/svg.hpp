#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lrvmc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Grid heatmap: values in row-major order, rows indexed by ys (bottom-up).
void write_heatmap_svg(const std::filesystem::path& file, const std::vector<double>& xs,
                       const std::vector<double>& ys, const std::vector<double>& values,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title);

void write_line_plot_svg(const std::filesystem::path& file,
                         const std::vector<PlotSeries>& series, const std::string& x_label,
                         const std::string& y_label, const std::string& title,
                         bool log_y = false);

void write_scatter_svg(const std::filesystem::path& file, const std::vector<PlotSeries>& groups,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title);

}  // namespace lrvmc
