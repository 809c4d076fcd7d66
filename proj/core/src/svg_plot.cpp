#include "rkm/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace rkm {
namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 300.0;
constexpr double kMargin = 40.0;

struct Frame {
  double x0, y0;  // panel origin in SVG coordinates
  double xlo, xhi, ylo, yhi;

  double sx(double x) const { return x0 + kMargin + (x - xlo) / (xhi - xlo) * (kPanelW - 2 * kMargin); }
  double sy(double y) const { return y0 + kPanelH - kMargin - (y - ylo) / (yhi - ylo) * (kPanelH - 2 * kMargin); }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& label) {
  os << "<rect x='" << f.x0 + kMargin << "' y='" << f.y0 + kMargin << "' width='" << kPanelW - 2 * kMargin
     << "' height='" << kPanelH - 2 * kMargin << "' fill='none' stroke='#444'/>\n";
  os << "<text x='" << f.x0 + kMargin << "' y='" << f.y0 + kMargin - 8 << "' font-size='12'>" << label << "</text>\n";
  os << "<text x='" << f.x0 + kMargin << "' y='" << f.y0 + kPanelH - kMargin + 16 << "' font-size='10'>" << f.xlo
     << "</text>\n";
  os << "<text x='" << f.x0 + kPanelW - kMargin << "' y='" << f.y0 + kPanelH - kMargin + 16
     << "' font-size='10' text-anchor='end'>" << f.xhi << "</text>\n";
}

void polyline(std::ostringstream& os, const Frame& f, const std::vector<double>& x, const std::vector<double>& y,
              const char* color) {
  os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    os << f.sx(x[i]) << ',' << f.sy(std::clamp(y[i], f.ylo, f.yhi)) << ' ';
  }
  os << "'/>\n";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_report_svg(const std::string& title, const std::vector<double>& points, const Curve& density,
                              const Curve& cdf) {
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());

  double xlo = density.x.empty() ? 0.0 : density.x.front();
  double xhi = density.x.empty() ? 1.0 : density.x.back();
  if (!sorted.empty()) {
    xlo = std::min(xlo, sorted.front());
    xhi = std::max(xhi, sorted.back());
  }
  if (!(xhi > xlo)) xhi = xlo + 1.0;

  const int bins = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(sorted.size()))), 10, 80);
  const double width = (xhi - xlo) / bins;
  std::vector<double> hist(bins, 0.0);
  for (double v : sorted) {
    const int b = std::clamp(static_cast<int>((v - xlo) / width), 0, bins - 1);
    hist[b] += 1.0;
  }
  if (!sorted.empty()) {
    for (double& h : hist) h /= sorted.size() * width;
  }

  double ymax = 0.0;
  for (double h : hist) ymax = std::max(ymax, h);
  for (double d : density.y) {
    if (std::isfinite(d)) ymax = std::max(ymax, d);
  }
  if (!(ymax > 0.0)) ymax = 1.0;

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << 2 * kPanelW << "' height='" << kPanelH + 30
     << "' font-family='sans-serif'>\n";
  os << "<text x='10' y='18' font-size='14'>" << escape(title) << "</text>\n";

  const Frame left{0.0, 30.0, xlo, xhi, 0.0, 1.05 * ymax};
  axes(os, left, "density");
  for (int b = 0; b < bins; ++b) {
    const double x = xlo + b * width;
    os << "<rect x='" << left.sx(x) << "' y='" << left.sy(hist[b]) << "' width='" << left.sx(x + width) - left.sx(x)
       << "' height='" << left.sy(0.0) - left.sy(hist[b]) << "' fill='#9ecae1' stroke='none'/>\n";
  }
  polyline(os, left, density.x, density.y, "#d62728");

  const Frame right{kPanelW, 30.0, xlo, xhi, 0.0, 1.0};
  axes(os, right, "cdf");
  std::vector<double> ex;
  std::vector<double> ey;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ex.push_back(sorted[i]);
    ey.push_back(static_cast<double>(i) / sorted.size());
    ex.push_back(sorted[i]);
    ey.push_back(static_cast<double>(i + 1) / sorted.size());
  }
  polyline(os, right, ex, ey, "#1f77b4");
  polyline(os, right, cdf.x, cdf.y, "#d62728");
  os << "</svg>\n";
  return os.str();
}

}  // namespace rkm
