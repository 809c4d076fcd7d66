#pragma once

#include <string>
#include <utility>

#include "rkm/kernel_matrix.hpp"
#include "rkm/spectral.hpp"

namespace rkm {

// Marchenko-Pastur law of the n x n Gram matrix (X_i^T X_j) with aspect
// ratio gamma = p / n: continuous part on [a, b] with
//   a = (1 - 1/sqrt(gamma))^2,  b = (1 + 1/sqrt(gamma))^2,
// density gamma / (2 pi x) sqrt((b - x)(x - a)), plus an atom of mass
// 1 - gamma at 0 when gamma < 1.
std::pair<double, double> mp_edges(double gamma);
double mp_atom_mass(double gamma);

double mp_density(double gamma, double x);  // continuous part only
double mp_cdf(double gamma, double x);      // includes the atom
double mp_cdf_left(double gamma, double x);

// Closed form 2 / (1 - 1/gamma - z - sqrt(z - a) sqrt(z - b)), Herglotz
// branch. Throws ArgumentError when Im z <= 0.
Complex mp_stieltjes(double gamma, Complex z);

// Law of shift + scale * X with X ~ MP(gamma); scale == 0 is the point mass
// at shift.
struct AffineMPLaw {
  double gamma = 1.0;
  double shift = 0.0;
  double scale = 1.0;
  double atom_mass = 0.0;  // transported atom (1 for the degenerate law)
  double atom_location = 0.0;
  bool degenerate = false;

  std::pair<double, double> support() const;  // continuous part, ordered
  double density(double x) const;
  double cdf(double x) const;
  double cdf_left(double x) const;
  Complex stieltjes(Complex z) const;
  LawView view() const;

  // key = value lines: type, gamma, shift, scale, atom_mass, atom_location.
  std::string to_key_value() const;
};

AffineMPLaw affine_mp_law(double gamma, double shift, double scale);

// Limit law predicted by the linearization theorems for the given kernel
// spec (see linear_coefficients). p is only used for p-dependent envelopes
// and numerical derivatives.
AffineMPLaw predicted_law(const KernelSpec& spec, double gamma, int p);

}  // namespace rkm
