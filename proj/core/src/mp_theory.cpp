#include "rkm/mp_theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rkm/errors.hpp"

namespace rkm {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("MP aspect ratio gamma must be > 0");
}

// Mass of the continuous part on [a, x]. Substituting x = c - r cos(theta)
// removes both square-root endpoints, leaving a smooth integrand.
double continuous_mass_below(double gamma, double x) {
  const auto [a, b] = mp_edges(gamma);
  if (x <= a) return 0.0;
  const double total = std::min(1.0, gamma);
  if (x >= b) return total;
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  const double theta_max = std::acos(std::clamp((c - x) / r, -1.0, 1.0));
  const bool hard_edge = (a == 0.0);
  auto integrand = [&](double theta) {
    if (hard_edge) return gamma * r * (1.0 + std::cos(theta)) / (2.0 * std::numbers::pi);
    const double s = std::sin(theta);
    return gamma * r * r * s * s / (2.0 * std::numbers::pi * (c - r * std::cos(theta)));
  };
  const double m = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, theta_max, 12, 1e-13);
  return std::min(m, total);
}

}  // namespace

std::pair<double, double> mp_edges(double gamma) {
  check_gamma(gamma);
  const double s = 1.0 / std::sqrt(gamma);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

double mp_atom_mass(double gamma) {
  check_gamma(gamma);
  return gamma < 1.0 ? 1.0 - gamma : 0.0;
}

double mp_density(double gamma, double x) {
  const auto [a, b] = mp_edges(gamma);
  if (x <= a || x >= b || x <= 0.0) return 0.0;
  return gamma / (2.0 * std::numbers::pi * x) * std::sqrt((b - x) * (x - a));
}

double mp_cdf(double gamma, double x) {
  const double atom = (x >= 0.0) ? mp_atom_mass(gamma) : 0.0;
  return std::clamp(atom + continuous_mass_below(gamma, x), 0.0, 1.0);
}

double mp_cdf_left(double gamma, double x) {
  const double atom = (x > 0.0) ? mp_atom_mass(gamma) : 0.0;
  return std::clamp(atom + continuous_mass_below(gamma, x), 0.0, 1.0);
}

Complex mp_stieltjes(double gamma, Complex z) {
  if (!(z.imag() > 0.0)) throw ArgumentError("mp_stieltjes needs Im z > 0");
  const auto [a, b] = mp_edges(gamma);
  const double y = 1.0 / gamma;
  // Roots of y z m^2 + (z - 1 + y) m + 1 = 0. The branch sqrt(z-a) sqrt(z-b)
  // behaves like z at infinity; writing the root as 2 / (...) avoids the
  // cancellation of the textbook form for large |z|.
  const Complex s = std::sqrt(z - a) * std::sqrt(z - b);
  Complex m = 2.0 / (1.0 - y - z - s);
  if (!(m.imag() > 0.0)) {
    const Complex other = (1.0 - y - z - s) / (2.0 * y * z);
    if (other.imag() > m.imag()) m = other;
  }
  return m;
}

std::pair<double, double> AffineMPLaw::support() const {
  if (degenerate) return {shift, shift};
  const auto [a, b] = mp_edges(gamma);
  const double lo = shift + scale * a;
  const double hi = shift + scale * b;
  return {std::min(lo, hi), std::max(lo, hi)};
}

double AffineMPLaw::density(double x) const {
  if (degenerate) return 0.0;
  return mp_density(gamma, (x - shift) / scale) / std::abs(scale);
}

double AffineMPLaw::cdf(double x) const {
  if (degenerate) return x >= shift ? 1.0 : 0.0;
  const double u = (x - shift) / scale;
  return scale > 0.0 ? mp_cdf(gamma, u) : 1.0 - mp_cdf_left(gamma, u);
}

double AffineMPLaw::cdf_left(double x) const {
  if (degenerate) return x > shift ? 1.0 : 0.0;
  const double u = (x - shift) / scale;
  return scale > 0.0 ? mp_cdf_left(gamma, u) : 1.0 - mp_cdf(gamma, u);
}

Complex AffineMPLaw::stieltjes(Complex z) const {
  if (!(z.imag() > 0.0)) throw ArgumentError("Stieltjes transform needs Im z > 0");
  if (degenerate) return 1.0 / (shift - z);
  const Complex w = (z - shift) / scale;
  if (scale > 0.0) return mp_stieltjes(gamma, w) / scale;
  // Im w < 0: use m(conj w) = conj m(w).
  return std::conj(mp_stieltjes(gamma, std::conj(w))) / scale;
}

LawView AffineMPLaw::view() const {
  const AffineMPLaw self = *this;
  LawView v;
  v.cdf = [self](double x) { return self.cdf(x); };
  v.cdf_left = [self](double x) { return self.cdf_left(x); };
  v.stieltjes = [self](Complex z) { return self.stieltjes(z); };
  if (atom_mass > 0.0) v.atoms.push_back(atom_location);
  return v;
}

std::string AffineMPLaw::to_key_value() const {
  std::ostringstream os;
  os << std::setprecision(17) << "type = affine-mp\ngamma = " << gamma << "\nshift = " << shift
     << "\nscale = " << scale << "\natom_mass = " << atom_mass << "\natom_location = " << atom_location << '\n';
  return os.str();
}

AffineMPLaw affine_mp_law(double gamma, double shift, double scale) {
  check_gamma(gamma);
  AffineMPLaw law;
  law.gamma = gamma;
  law.shift = shift;
  law.scale = scale;
  law.atom_location = shift;
  law.degenerate = (scale == 0.0);
  law.atom_mass = law.degenerate ? 1.0 : mp_atom_mass(gamma);
  return law;
}

AffineMPLaw predicted_law(const KernelSpec& spec, double gamma, int p) {
  const LinearCoefficients c = linear_coefficients(spec, p);
  return affine_mp_law(gamma, c.shift, c.scale);
}

}  // namespace rkm
