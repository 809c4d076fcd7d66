#include "rkm/limit_solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rkm/errors.hpp"

namespace rkm {

namespace {

void validate(const LimitParams& p) {
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw ArgumentError("limit law needs gamma > 0");
  if (!(p.a >= 0.0) || !std::isfinite(p.a)) throw ArgumentError("limit law needs a >= 0");
  if (!std::isfinite(p.nu) || p.a * p.a > p.nu * (1.0 + 1e-12) + 1e-15) {
    throw ArgumentError("limit law needs a^2 <= nu (a=" + std::to_string(p.a) + ", nu=" + std::to_string(p.nu) + ")");
  }
}

struct Coefs {
  double a, c, d;  // c = a/gamma, d = (nu - a^2)/gamma
};

Coefs coefs(const LimitParams& p) {
  return {p.a, p.a / p.gamma, std::max(0.0, p.nu - p.a * p.a) / p.gamma};
}

// Right-hand side map T(m) = -1/(z + a(1 - 1/(1 + c m)) + d m). For c, d >= 0
// it maps the upper half-plane into itself.
Complex fixed_point_map(const Coefs& k, Complex z, Complex m) {
  return -1.0 / (z + k.a * (1.0 - 1.0 / (1.0 + k.c * m)) + k.d * m);
}

// Multiplying the equation by m (1 + c m):
//   d c m^3 + ((z + a) c + d) m^2 + (z + c) m + 1 = 0.
std::pair<Complex, Complex> cubic_and_derivative(const Coefs& k, Complex z, Complex m) {
  const Complex c3 = k.d * k.c;
  const Complex c2 = (z + k.a) * k.c + k.d;
  const Complex c1 = z + k.c;
  const Complex value = ((c3 * m + c2) * m + c1) * m + 1.0;
  const Complex deriv = (3.0 * c3 * m + 2.0 * c2) * m + c1;
  return {value, deriv};
}

bool acceptable(const LimitParams& params, Complex z, Complex m, double max_residual) {
  return m.imag() > 0.0 && std::isfinite(m.real()) && std::isfinite(m.imag()) &&
         equation_residual(params, z, m) < max_residual * std::max(1.0, std::abs(z));
}

std::optional<Complex> newton_polish(const LimitParams& params, const Coefs& k, Complex z, Complex m,
                                     double max_residual) {
  for (int it = 0; it < 60; ++it) {
    const auto [f, df] = cubic_and_derivative(k, z, m);
    if (std::abs(df) == 0.0) break;
    const Complex step = f / df;
    m -= step;
    if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) return std::nullopt;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(m))) break;
  }
  if (acceptable(params, z, m, max_residual)) return m;
  return std::nullopt;
}

}  // namespace

double equation_residual(const LimitParams& params, Complex z, Complex m) {
  const Coefs k = coefs(params);
  return std::abs(-1.0 / m - z - k.a * (1.0 - 1.0 / (1.0 + k.c * m)) - k.d * m);
}

LimitParams limit_params_from_key_value(std::string_view text, double gamma) {
  std::optional<double> a;
  std::optional<double> nu;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char c) { return std::isspace(c); }), key.end());
    if (key != "a" && key != "nu") continue;
    double value = 0.0;
    try {
      value = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ArgumentError("malformed value for '" + key + "': " + line);
    }
    (key == "a" ? a : nu) = value;
  }
  if (!a || !nu) throw ArgumentError("parameter record needs both 'a' and 'nu'");
  LimitParams params{*a, *nu, gamma};
  validate(params);
  return params;
}

Complex solve_point(const LimitParams& params, Complex z, std::optional<Complex> start, const SolveOptions& options) {
  validate(params);
  if (!(z.imag() > 0.0)) throw ArgumentError("solve_point needs Im z > 0");
  const Coefs k = coefs(params);

  Complex m0 = start.value_or(-1.0 / z);
  if (!(m0.imag() > 0.0)) m0 = -1.0 / z;

  // A warm start close to the root goes straight to Newton.
  if (start) {
    if (auto polished = newton_polish(params, k, z, m0, options.max_residual)) return *polished;
  }

  double damping = options.damping;
  double last_change = 0.0;
  for (int restart = 0; restart < 4; ++restart) {
    Complex m = m0;
    bool restart_needed = false;
    for (int step = 0; step < options.max_steps; ++step) {
      const Complex denom = 1.0 + k.c * m;
      if (std::abs(denom) < 1e-14) {
        restart_needed = true;
        break;
      }
      const Complex next = (1.0 - damping) * m + damping * fixed_point_map(k, z, m);
      if (!(next.imag() > 0.0)) {
        restart_needed = true;
        break;
      }
      last_change = std::abs(next - m);
      m = next;
      // Newton converges quadratically once the iterate is in its basin; try
      // it periodically instead of waiting out the linear rate near the axis.
      if (last_change < options.tolerance || step % 50 == 49) {
        if (auto polished = newton_polish(params, k, z, m, options.max_residual)) return *polished;
        if (last_change < options.tolerance) break;
      }
    }
    if (!restart_needed) {
      if (acceptable(params, z, m, options.max_residual)) return m;
      break;
    }
    damping *= 0.5;
  }
  std::ostringstream os;
  os << "limit equation did not converge at z=(" << z.real() << ", " << z.imag() << ") for a=" << params.a
     << ", nu=" << params.nu << ", gamma=" << params.gamma << " (last change " << last_change << ")";
  throw SolverError(os.str());
}

namespace {

double im_density(const LimitParams& params, double x, double eta, std::optional<Complex> start = std::nullopt) {
  return solve_point(params, Complex(x, eta), start).imag() / std::numbers::pi;
}

// A point mass w at x0 gives eta * Im m(x0 + i eta) -> w as eta -> 0, while
// an integrable density (even a square-root edge) sends it to zero.
std::optional<Atom> probe_atom(const LimitParams& params, double x0, double eps, double h) {
  // Golden-section refinement of the peak location within one grid spacing.
  double lo = x0 - h;
  double hi = x0 + h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double x1 = hi - g * (hi - lo);
    const double x2 = lo + g * (hi - lo);
    if (im_density(params, x1, eps * 1e-2) > im_density(params, x2, eps * 1e-2)) {
      hi = x2;
    } else {
      lo = x1;
    }
  }
  const double loc = 0.5 * (lo + hi);
  const double w_coarse = eps * std::numbers::pi * im_density(params, loc, eps);
  const double w_fine = 1e-3 * eps * std::numbers::pi * im_density(params, loc, 1e-3 * eps);
  if (w_fine > 1e-6 && w_fine > 0.8 * w_coarse) return Atom{loc, w_fine};
  return std::nullopt;
}

void tabulate(const LimitParams& params, double lo, double hi, const GridOptions& opt, LimitLaw& law) {
  const int n = opt.n_points;
  law.x.resize(static_cast<std::size_t>(n));
  law.m_values.resize(static_cast<std::size_t>(n));
  law.density.resize(static_cast<std::size_t>(n));
  law.atoms.clear();
  std::optional<Complex> warm;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    const Complex m = solve_point(params, Complex(x, opt.epsilon), warm);
    warm = m;
    law.x[static_cast<std::size_t>(i)] = x;
    law.m_values[static_cast<std::size_t>(i)] = m;
    law.density[static_cast<std::size_t>(i)] = m.imag() / std::numbers::pi;
  }

  // Atom candidates: local maxima carrying mass comparable to a point mass.
  const double h = (hi - lo) / (n - 1);
  for (int i = 1; i + 1 < n; ++i) {
    const double d = law.density[static_cast<std::size_t>(i)];
    if (d < law.density[static_cast<std::size_t>(i - 1)] || d < law.density[static_cast<std::size_t>(i + 1)]) continue;
    if (d * std::numbers::pi * opt.epsilon < 1e-4) continue;
    if (auto atom = probe_atom(params, law.x[static_cast<std::size_t>(i)], opt.epsilon, h)) {
      const bool duplicate = std::any_of(law.atoms.begin(), law.atoms.end(),
                                         [&](const Atom& a) { return std::abs(a.location - atom->location) < 2 * h; });
      if (!duplicate) law.atoms.push_back(*atom);
    }
  }

  // CDF: integrate the density with the Lorentz peaks of the atoms removed,
  // then add each atom as a step.
  std::vector<double> smooth(law.density);
  for (const Atom& a : law.atoms) {
    for (int i = 0; i < n; ++i) {
      const double dx = law.x[static_cast<std::size_t>(i)] - a.location;
      smooth[static_cast<std::size_t>(i)] -= a.mass / std::numbers::pi * opt.epsilon / (dx * dx + opt.epsilon * opt.epsilon);
    }
  }
  law.cdf.assign(static_cast<std::size_t>(n), 0.0);
  double acc = 0.0;
  for (int i = 1; i < n; ++i) {
    acc += 0.5 * h * (std::max(0.0, smooth[static_cast<std::size_t>(i - 1)]) + std::max(0.0, smooth[static_cast<std::size_t>(i)]));
    law.cdf[static_cast<std::size_t>(i)] = acc;
  }
  for (const Atom& a : law.atoms) {
    for (int i = 0; i < n; ++i) {
      if (law.x[static_cast<std::size_t>(i)] >= a.location) law.cdf[static_cast<std::size_t>(i)] += a.mass;
    }
  }
  for (int i = 1; i < n; ++i) {
    law.cdf[static_cast<std::size_t>(i)] = std::max(law.cdf[static_cast<std::size_t>(i)], law.cdf[static_cast<std::size_t>(i - 1)]);
  }
}

// Radius containing the support: the law is the limit of a * (Gram - I) plus
// a semicircular part of variance nu - a^2, padded for the Lorentz tails.
std::pair<double, double> initial_range(const LimitParams& p) {
  const double mp_hi = p.a * (1.0 + 1.0 / std::sqrt(p.gamma)) * (1.0 + 1.0 / std::sqrt(p.gamma));
  const double semi = 2.0 * std::sqrt(std::max(0.0, p.nu - p.a * p.a) / p.gamma);
  return {-p.a - semi - 2.0, mp_hi + semi + 2.0};
}

}  // namespace

LimitLaw solve_grid(const LimitParams& params, const GridOptions& options) {
  validate(params);
  if (!(options.epsilon > 0.0)) throw ArgumentError("inversion height epsilon must be > 0");
  if (options.n_points < 3) throw ArgumentError("solve_grid needs at least 3 grid points");
  auto [lo, hi] = options.x_range.value_or(initial_range(params));
  if (!(hi > lo)) throw ArgumentError("x_range must satisfy lo < hi");

  LimitLaw law;
  law.params = params;
  law.epsilon = options.epsilon;
  for (int attempt = 0;; ++attempt) {
    try {
      tabulate(params, lo, hi, options, law);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " [grid " + std::to_string(lo) + ".." + std::to_string(hi) + "]");
    }
    if (1.0 - law.total_mass() <= options.max_mass_deficit || attempt >= options.max_widenings) break;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * 1.5;
    lo = mid - half;
    hi = mid + half;
  }
  return law;
}

double law_cdf(const LimitLaw& law, double x) {
  if (law.x.empty() || x < law.x.front()) return 0.0;
  if (x >= law.x.back()) return 1.0;
  const auto it = std::upper_bound(law.x.begin(), law.x.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - law.x.begin()) - 1;
  const double t = (x - law.x[i]) / (law.x[i + 1] - law.x[i]);
  double v = law.cdf[i] + t * (law.cdf[i + 1] - law.cdf[i]);
  // Atom steps sit exactly at their location rather than being smeared over
  // the grid cell that contains them.
  for (const Atom& a : law.atoms) {
    if (a.location > law.x[i] && a.location <= law.x[i + 1]) {
      const double continuous = law.cdf[i + 1] - law.cdf[i] - a.mass;
      v = law.cdf[i] + t * continuous + (x >= a.location ? a.mass : 0.0);
    }
  }
  return std::clamp(v, 0.0, 1.0);
}

double law_cdf_left(const LimitLaw& law, double x) {
  double v = law_cdf(law, x);
  for (const Atom& a : law.atoms) {
    if (a.location == x) v -= a.mass;
  }
  return std::clamp(v, 0.0, 1.0);
}

LimitLaw shifted(LimitLaw law, double by) {
  for (double& x : law.x) x += by;
  for (Atom& a : law.atoms) a.location += by;
  law.shift += by;
  return law;
}

LawView LimitLaw::view() const {
  auto shared = std::make_shared<const LimitLaw>(*this);
  LawView v;
  v.cdf = [shared](double x) { return law_cdf(*shared, x); };
  v.cdf_left = [shared](double x) { return law_cdf_left(*shared, x); };
  v.stieltjes = [shared](Complex z) { return shared->stieltjes(z); };
  for (const Atom& a : atoms) v.atoms.push_back(a.location);
  return v;
}

void write_law_csv(const std::filesystem::path& path, const LimitLaw& law) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open '" + path.string() + "' for writing");
  out << "x,density,cdf,re_m,im_m\n" << std::setprecision(17);
  for (std::size_t i = 0; i < law.x.size(); ++i) {
    out << law.x[i] << ',' << law.density[i] << ',' << law.cdf[i] << ',' << law.m_values[i].real() << ','
        << law.m_values[i].imag() << '\n';
  }
  std::ofstream meta(path.string() + ".meta");
  if (!meta) throw ArgumentError("cannot open '" + path.string() + ".meta' for writing");
  meta << std::setprecision(17) << "type = functional-equation\na = " << law.params.a << "\nnu = " << law.params.nu
       << "\ngamma = " << law.params.gamma << "\nshift = " << law.shift << "\nepsilon = " << law.epsilon
       << "\natoms = " << law.atoms.size() << '\n';
  for (std::size_t i = 0; i < law.atoms.size(); ++i) {
    meta << "atom" << i << "_location = " << law.atoms[i].location << "\natom" << i << "_mass = " << law.atoms[i].mass
         << '\n';
  }
}

}  // namespace rkm
