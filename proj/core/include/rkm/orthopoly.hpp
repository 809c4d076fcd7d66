#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rkm/ensembles.hpp"
#include "rkm/envelope.hpp"
#include "rkm/rng.hpp"

namespace rkm {

// Monomial coefficients, lowest degree first.
using Polynomial = std::vector<double>;

double evaluate(const Polynomial& poly, double x);

enum class MomentSource { ExactCombinatorial, MonteCarlo };

// m_0..m_K of xi_p = sqrt(p) X^T Y for two independent draws X, Y.
struct MomentSequence {
  std::vector<double> values;
  std::vector<double> std_errors;  // zeros for exact moments
  MomentSource source = MomentSource::ExactCombinatorial;
  long long samples = 0;
  VectorEnsemble ensemble;

  int max_order() const { return static_cast<int>(values.size()) - 1; }
};

// E N^k for N ~ N(0, 1): (k-1)!! for even k, 0 for odd k.
std::vector<double> gaussian_moments(int K);

// Exact moments for iid-entry ensembles by enumerating the integer
// partitions of k that index E(sum_i u_i v_i)^k. K <= 16. Throws
// CapabilityError for SphereUniform.
MomentSequence xi_moments_exact(const VectorEnsemble& ensemble, int K);

// One exact-in-distribution draw of xi_p without forming the vectors:
// Gaussian via N * sqrt(chi2_p / p), Rademacher via a binomial sum, sphere
// via the Beta law of one coordinate of a uniform unit vector.
double sample_xi(const VectorEnsemble& ensemble, Rng& rng);

MomentSequence xi_moments_monte_carlo(const VectorEnsemble& ensemble, int K, long long samples, std::uint64_t seed);

// Exact where available, Monte Carlo otherwise.
MomentSequence xi_moments(const VectorEnsemble& ensemble, int K, long long mc_samples, std::uint64_t seed);

// Orthonormal Hermite polynomial h_k with respect to the standard Gaussian.
Polynomial hermite(int k);

inline constexpr int kMaxBasisDegree = 8;

// p_k from the bordered Hankel determinant, scaled by
// c_k = 1 / sqrt(det M_{k-1} det M_k) so the leading coefficient
// c_k det M_{k-1} is positive. Throws DegeneracyError when some det M_j,
// j <= k, falls below 1e-10 times the product of its diagonal.
Polynomial orthopoly_from_moments(const MomentSequence& moments, int k);

struct OrthoBasis {
  int degree = 0;
  std::vector<Polynomial> polys;     // p_0..p_degree
  std::vector<double> hankel_dets;   // det M_0..det M_degree
};

OrthoBasis build_basis(const MomentSequence& moments, int degree);

// <p_i, p_j> under the moment functional; the identity for an exact basis.
Eigen::MatrixXd moment_gram(const OrthoBasis& basis, const MomentSequence& moments);

// max over the grid of |p_k(x) - h_k(x)| / (1 + |x|^k).
double hermite_deviation(const OrthoBasis& basis, int k, std::span<const double> grid);

// Orthogonal-expansion data of k(x, p) = sqrt(p) f(x / sqrt(p), p).
struct AdmissibleParams {
  int p = 0;
  int L = 0;
  std::vector<double> coeffs;      // a_{0,p}..a_{L,p}
  std::vector<double> std_errors;  // Monte Carlo standard errors of coeffs
  double a = 0.0;                  // a_{1,p}
  double nu = 0.0;                 // Var k(xi_p), raised to sum_{k>=1} a_k^2 if noise put it below
  double nu_raw = 0.0;             // plain sample variance
  double nu_std_error = 0.0;
  double tail_mass = 0.0;          // nu - sum_{1<=k<=L} a_k^2 >= 0
  bool inconsistent = false;       // raw tail below -3 stderr
  long long samples = 0;
  OrthoBasis basis;
};

AdmissibleParams envelope_coeffs(const Envelope& f, const VectorEnsemble& ensemble, int L, long long samples,
                                 std::uint64_t seed);

// key = value record: p, L, a, nu, nu_raw, nu_std_error, tail_mass,
// inconsistent, samples, a_0..a_L.
std::string to_key_value(const AdmissibleParams& params);

// f_L(x, p) = p^{-1/2} sum_{k<=L} a_k p_k(sqrt(p) x).
Envelope truncated_envelope(const AdmissibleParams& params);

}  // namespace rkm
