#include "rkm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "rkm/errors.hpp"

namespace rkm {

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ArgumentError("eigenvalues need a square matrix");
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver did not converge on a " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " matrix");
  }
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  return ev;
}

SpectralSample eigenvalues(const KernelMatrix& a) {
  SpectralSample s;
  try {
    s.eigenvalues = symmetric_eigenvalues(a.data);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " [spec " + a.spec.to_string() + ", seed " +
                         std::to_string(a.provenance.seed) + "]");
  }
  s.n = a.n();
  s.p = a.provenance.ensemble.p;
  s.gamma = s.n > 0 ? static_cast<double>(s.p) / s.n : 0.0;
  s.seed = a.provenance.seed;
  s.spec = a.spec.to_string();
  return s;
}

Esd::Esd(std::vector<double> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
}

Esd Esd::pooled(std::span<const SpectralSample> samples) {
  std::vector<double> all;
  for (const auto& s : samples) all.insert(all.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  return Esd(std::move(all));
}

double Esd::cdf(double x) const {
  if (points_.empty()) return 0.0;
  const auto it = std::upper_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double Esd::cdf_left(double x) const {
  if (points_.empty()) return 0.0;
  const auto it = std::lower_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

Complex Esd::stieltjes(Complex z) const { return empirical_stieltjes(points_, z); }

Complex empirical_stieltjes(std::span<const double> eigenvalues, Complex z) {
  if (!(z.imag() > 0.0)) throw ArgumentError("Stieltjes transform needs Im z > 0");
  if (eigenvalues.empty()) throw ArgumentError("Stieltjes transform of an empty spectrum");
  Complex sum = 0.0;
  for (double l : eigenvalues) sum += 1.0 / (l - z);
  return sum / static_cast<double>(eigenvalues.size());
}

Complex empirical_stieltjes(const SpectralSample& sample, Complex z) {
  return empirical_stieltjes(sample.eigenvalues, z);
}

double ks_distance(const Esd& a, const Esd& b) {
  double d = 0.0;
  for (const auto* e : {&a, &b}) {
    for (double x : e->points()) {
      d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
      d = std::max(d, std::abs(a.cdf_left(x) - b.cdf_left(x)));
    }
  }
  return d;
}

double ks_distance(const Esd& e, const LawView& law) {
  double d = 0.0;
  const auto& pts = e.points();
  const double n = static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    const double x = pts[i];
    d = std::max(d, std::abs(static_cast<double>(j) / n - law.cdf(x)));
    d = std::max(d, std::abs(static_cast<double>(i) / n - law.cdf_left(x)));
    i = j;
  }
  for (double x : law.atoms) {
    d = std::max(d, std::abs(e.cdf(x) - law.cdf(x)));
    d = std::max(d, std::abs(e.cdf_left(x) - law.cdf_left(x)));
  }
  return d;
}

double wasserstein1(const Esd& a, const Esd& b) {
  if (a.size() == 0 || b.size() == 0) throw ArgumentError("wasserstein1 of an empty ESD");
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.points()[i] - b.points()[i]);
    return s / static_cast<double>(a.size());
  }
  std::vector<double> grid = a.points();
  grid.insert(grid.end(), b.points().begin(), b.points().end());
  std::sort(grid.begin(), grid.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double w = grid[k + 1] - grid[k];
    if (w > 0.0) s += w * std::abs(a.cdf(grid[k]) - b.cdf(grid[k]));
  }
  return s;
}

double wasserstein1(const Esd& e, const LawView& law, double lo, double hi, int grid_points) {
  if (!(hi > lo) || grid_points < 2) throw ArgumentError("wasserstein1 needs lo < hi and >= 2 grid points");
  std::vector<double> grid;
  grid.reserve(e.size() + static_cast<std::size_t>(grid_points));
  for (int k = 0; k < grid_points; ++k) grid.push_back(lo + (hi - lo) * k / (grid_points - 1));
  for (double x : e.points()) {
    if (x > lo && x < hi) grid.push_back(x);
  }
  std::sort(grid.begin(), grid.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double w = grid[k + 1] - grid[k];
    if (w <= 0.0) continue;
    const double mid = 0.5 * (grid[k] + grid[k + 1]);
    s += w * std::abs(e.cdf(mid) - law.cdf(mid));
  }
  return s;
}

double stieltjes_sup_distance(const Esd& e, const LawView& law, std::span<const Complex> z_grid) {
  double d = 0.0;
  for (const Complex& z : z_grid) d = std::max(d, std::abs(e.stieltjes(z) - law.stieltjes(z)));
  return d;
}

VarianceDecayReport stieltjes_variance_decay(const SpectrumGenerator& generate, Complex z, int trials,
                                             std::span<const int> sizes) {
  if (trials < 2) throw ArgumentError("variance of m_A(z) needs at least 2 trials");
  if (!(z.imag() > 0.0)) throw ArgumentError("variance decay needs Im z > 0");
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] <= sizes[k - 1]) throw ArgumentError("variance decay sizes must be increasing");
  }
  VarianceDecayReport report{z, {}, true};
  for (int n : sizes) {
    std::vector<Complex> values;
    values.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) values.push_back(empirical_stieltjes(generate(n, t), z));
    Complex mean = 0.0;
    for (const auto& v : values) mean += v;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (const auto& v : values) var += std::norm(v - mean);
    var /= static_cast<double>(trials - 1);
    report.rows.push_back({n, trials, mean, var});
  }
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    if (!(report.rows[k].variance < report.rows[k - 1].variance)) report.monotone_decreasing = false;
  }
  return report;
}

void write_esd_csv(const std::filesystem::path& path, const SpectralSample& sample) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open '" + path.string() + "' for writing");
  out << "lambda\n" << std::setprecision(17);
  for (double l : sample.eigenvalues) out << l << '\n';

  std::ofstream meta(path.string() + ".meta");
  if (!meta) throw ArgumentError("cannot open '" + path.string() + ".meta' for writing");
  meta << std::setprecision(17) << "n = " << sample.n << "\np = " << sample.p << "\ngamma = " << sample.gamma
       << "\nseed = " << sample.seed << "\nspec = " << sample.spec << '\n';
}

SpectralSample read_esd_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "lambda") {
    throw ArgumentError("'" + path.string() + "' is not an ESD file (missing 'lambda' header)");
  }
  SpectralSample s;
  while (std::getline(in, line)) {
    if (!line.empty()) s.eigenvalues.push_back(std::stod(line));
  }
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
  s.n = static_cast<int>(s.eigenvalues.size());

  std::ifstream meta(path.string() + ".meta");
  std::map<std::string, std::string> kv;
  while (meta && std::getline(meta, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (kv.count("p")) s.p = std::stoi(kv["p"]);
  if (kv.count("gamma")) s.gamma = std::stod(kv["gamma"]);
  if (kv.count("seed")) s.seed = std::stoull(kv["seed"]);
  if (kv.count("spec")) s.spec = kv["spec"];
  return s;
}

}  // namespace rkm
