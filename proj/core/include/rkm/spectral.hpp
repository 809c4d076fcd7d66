#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rkm/kernel_matrix.hpp"

namespace rkm {

using Complex = std::complex<double>;

// Sorted real spectrum of one realized matrix.
struct SpectralSample {
  std::vector<double> eigenvalues;  // ascending
  int n = 0;
  int p = 0;
  double gamma = 0.0;  // p / n
  std::uint64_t seed = 0;
  std::string spec;
};

// Dense symmetric eigenvalues, ascending. Throws NumericalError when the
// solver does not converge.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a);

SpectralSample eigenvalues(const KernelMatrix& a);

// Empirical spectral distribution: uniform weight on the support points.
class Esd {
 public:
  Esd() = default;
  explicit Esd(std::vector<double> points);
  explicit Esd(const SpectralSample& sample) : Esd(sample.eigenvalues) {}

  // Concatenation of the eigenvalues of several samples.
  static Esd pooled(std::span<const SpectralSample> samples);

  std::size_t size() const { return points_.size(); }
  const std::vector<double>& points() const { return points_; }

  double cdf(double x) const;       // P(lambda <= x)
  double cdf_left(double x) const;  // P(lambda < x)
  Complex stieltjes(Complex z) const;

 private:
  std::vector<double> points_;
};

// (1/n) sum 1/(lambda_i - z). Throws ArgumentError when Im z <= 0.
Complex empirical_stieltjes(std::span<const double> eigenvalues, Complex z);
Complex empirical_stieltjes(const SpectralSample& sample, Complex z);

// Read-only view of a limiting law: right- and left-continuous CDFs, atom
// locations, and its Stieltjes transform.
struct LawView {
  std::function<double(double)> cdf;
  std::function<double(double)> cdf_left;
  std::vector<double> atoms;
  std::function<Complex(Complex)> stieltjes;
};

// Sup of |F_1 - F_2|, evaluated at every jump point from both sides.
double ks_distance(const Esd& a, const Esd& b);

// Sup over eigenvalue points (at x and x-) and over the law's atoms. Exact
// for a step function against a continuous-plus-atoms CDF.
double ks_distance(const Esd& e, const LawView& law);

// (1/n) sum |lambda_i - mu_i| for equal sizes, otherwise the exact integral of
// |F_1 - F_2| over the merged step grid.
double wasserstein1(const Esd& a, const Esd& b);

// Integral of |F_emp - F_law| over [lo, hi] (midpoint rule between merged
// eigenvalue and uniform grid points).
double wasserstein1(const Esd& e, const LawView& law, double lo, double hi, int grid_points = 4096);

// max_k |m_e(z_k) - m_law(z_k)|.
double stieltjes_sup_distance(const Esd& e, const LawView& law, std::span<const Complex> z_grid);

struct VarianceDecayRow {
  int n = 0;
  int trials = 0;
  Complex mean;
  double variance = 0.0;  // sample variance of m_A(z), E|m - mean|^2 with n-1 normalization
};

struct VarianceDecayReport {
  Complex z;
  std::vector<VarianceDecayRow> rows;
  bool monotone_decreasing = false;
};

// Produces one spectrum of size n for the given trial index.
using SpectrumGenerator = std::function<SpectralSample(int n, int trial)>;

VarianceDecayReport stieltjes_variance_decay(const SpectrumGenerator& generate, Complex z, int trials,
                                             std::span<const int> sizes);

// CSV with header "lambda" plus a sidecar "<path>.meta" holding n, p, gamma,
// seed and spec as key = value lines.
void write_esd_csv(const std::filesystem::path& path, const SpectralSample& sample);
SpectralSample read_esd_csv(const std::filesystem::path& path);

}  // namespace rkm
