#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rkm/spectral.hpp"

namespace rkm {

// Parameters of the limiting equation
//   -1/m = z + a (1 - 1/(1 + (a/gamma) m)) + ((nu - a^2)/gamma) m.
struct LimitParams {
  double a = 0.0;
  double nu = 1.0;
  double gamma = 1.0;
};

// Reads a and nu from key = value lines (other keys are ignored), e.g. the
// record written by `rkm expand`. Throws ArgumentError when either is missing.
LimitParams limit_params_from_key_value(std::string_view text, double gamma);

struct SolveOptions {
  double damping = 0.5;
  double tolerance = 1e-13;  // successive-change stop for the fixed point
  int max_steps = 10000;
  double max_residual = 1e-10;  // relative to max(1, |z|)
};

// |-1/m - z - a(1 - 1/(1 + (a/gamma) m)) - ((nu - a^2)/gamma) m|
double equation_residual(const LimitParams& params, Complex z, Complex m);

// Herglotz solution m(z). Damped fixed-point iteration from `start`
// (default -1/z), polished by Newton on the cleared cubic. Throws
// ArgumentError on bad parameters and SolverError on non-convergence.
Complex solve_point(const LimitParams& params, Complex z, std::optional<Complex> start = std::nullopt,
                    const SolveOptions& options = {});

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Solved law on a real grid, inverted at height epsilon.
struct LimitLaw {
  LimitParams params;
  double epsilon = 1e-3;
  std::vector<double> x;
  std::vector<Complex> m_values;  // m(x + i epsilon)
  std::vector<double> density;    // Im m / pi, atoms included as Lorentz peaks
  std::vector<double> cdf;        // trapezoid of the atom-free density plus atom steps
  std::vector<Atom> atoms;
  double shift = 0.0;  // law of X + shift; x and atoms are already moved

  double total_mass() const { return cdf.empty() ? 0.0 : cdf.back(); }
  Complex stieltjes(Complex z) const { return solve_point(params, z - shift); }
  LawView view() const;
};

struct GridOptions {
  std::optional<std::pair<double, double>> x_range;  // auto-detected when empty
  int n_points = 4001;
  double epsilon = 1e-3;
  double max_mass_deficit = 1e-3;
  int max_widenings = 12;
};

LimitLaw solve_grid(const LimitParams& params, const GridOptions& options = {});

// Translates the law by `by` (grid, atoms and Stieltjes transform).
LimitLaw shifted(LimitLaw law, double by);

// Linear interpolation of the tabulated CDF, clamped to [0, 1]; 0 below
// and 1 above the grid.
double law_cdf(const LimitLaw& law, double x);
double law_cdf_left(const LimitLaw& law, double x);

// CSV "x,density,cdf,re_m,im_m" plus "<path>.meta" (type, a, nu, gamma,
// epsilon, atoms).
void write_law_csv(const std::filesystem::path& path, const LimitLaw& law);

}  // namespace rkm
