#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rep::cli {

namespace {

double apply_scale(double v, const std::string& scale) {
  if (scale == "log") return std::log10(std::max(std::abs(v), 1e-300));
  if (scale == "symlog") return std::copysign(std::log10(1.0 + std::abs(v)), v);
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& x_scale,
                     const std::string& y_scale, const std::vector<SvgSeries>& series) {
  const double W = 720, H = 480, ML = 60, MR = 20, MT = 40, MB = 40;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = apply_scale(s.x[i], x_scale);
      const double y = apply_scale(s.y[i], y_scale);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
         "viewBox=\"0 0 720 480\">\n";
  out += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  out += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  // axes
  out += "<line x1=\"" + fmt(ML) + "\" y1=\"" + fmt(H - MB) + "\" x2=\"" + fmt(W - MR) +
         "\" y2=\"" + fmt(H - MB) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(ML) + "\" y1=\"" + fmt(MT) + "\" x2=\"" + fmt(ML) + "\" y2=\"" +
         fmt(H - MB) + "\" stroke=\"black\"/>\n";
  char lbl[64];
  std::snprintf(lbl, sizeof(lbl), "%.4g .. %.4g (%s)", xmin, xmax, x_scale.c_str());
  out += "<text x=\"" + fmt((ML + W - MR) / 2) + "\" y=\"" + fmt(H - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + lbl +
         "</text>\n";
  std::snprintf(lbl, sizeof(lbl), "%.4g .. %.4g (%s)", ymin, ymax, y_scale.c_str());
  out += "<text x=\"14\" y=\"" + fmt((MT + H - MB) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 " + fmt((MT + H - MB) / 2) + ")\">" + lbl + "</text>\n";

  double legend_y = MT + 8;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = apply_scale(s.x[i], x_scale);
      const double y = apply_scale(s.y[i], y_scale);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      pts += fmt(px(x)) + "," + fmt(py(y)) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    out += "<text x=\"" + fmt(W - MR - 150) + "\" y=\"" + fmt(legend_y) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + s.color + "\">" +
           s.label + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace rep::cli
