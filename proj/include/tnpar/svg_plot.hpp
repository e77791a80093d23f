#pragma once

// Minimal SVG line plots with error bars, for sweep reports.

#include <string>
#include <vector>

namespace tnpar {

struct PlotSeries {
  std::string name;
  std::vector<double> x, y, yerr;
};

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series);

}  // namespace tnpar
