#include "tnpar/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tnpar {

namespace {

const char* kColors[] = {"#1f6fb4", "#d0543c", "#3d9454", "#8a5fb0", "#b08a2e", "#4aa3a3"};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 130, mt = 45, mb = 55;  // margins; legend lives on the right
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = s.y[i] - e;
        ymax = s.y[i] + e;
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i] - e);
        ymax = std::max(ymax, s.y[i] + e);
      }
    }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // axes and ticks
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    double xv = xmin + (xmax - xmin) * i / ticks;
    double yv = ymin + (ymax - ymin) * i / ticks;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(xv)
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 20
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 9 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    std::ostringstream pts;
    for (size_t i = 0; i < sr.x.size(); ++i) pts << px(sr.x[i]) << "," << py(sr.y[i]) << " ";
    out << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    for (size_t i = 0; i < sr.x.size(); ++i) {
      double cx = px(sr.x[i]);
      out << "<circle cx=\"" << cx << "\" cy=\"" << py(sr.y[i]) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
      if (i < sr.yerr.size() && sr.yerr[i] > 0.0) {
        double lo = py(sr.y[i] - sr.yerr[i]), hi = py(sr.y[i] + sr.yerr[i]);
        out << "<line x1=\"" << cx << "\" y1=\"" << lo << "\" x2=\"" << cx << "\" y2=\"" << hi
            << "\" stroke=\"" << color << "\"/>\n";
        out << "<line x1=\"" << cx - 4 << "\" y1=\"" << lo << "\" x2=\"" << cx + 4
            << "\" y2=\"" << lo << "\" stroke=\"" << color << "\"/>\n";
        out << "<line x1=\"" << cx - 4 << "\" y1=\"" << hi << "\" x2=\"" << cx + 4
            << "\" y2=\"" << hi << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    double ly = mt + 14.0 * s;
    out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 32
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << ml + pw + 37 << "\" y=\"" << ly + 4 << "\">" << sr.name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace tnpar
