#ifndef REP_CLI_SVG_HPP
#define REP_CLI_SVG_HPP

#include <string>
#include <vector>

namespace rep::cli {

struct SvgSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal polyline plot. Scales: "lin", "log" (log10 of |y|), or "symlog"
// (sign(y) * log10(1+|y|)) per axis.
std::string svg_plot(const std::string& title, const std::string& x_scale,
                     const std::string& y_scale, const std::vector<SvgSeries>& series);

}  // namespace rep::cli

#endif
