#pragma once

#include <string>
#include <vector>

namespace rkm {

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

// Two-panel SVG: histogram of `points` with the law density overlaid, and
// the empirical CDF with the law CDF overlaid.
std::string render_report_svg(const std::string& title, const std::vector<double>& points, const Curve& density,
                              const Curve& cdf);

}  // namespace rkm
