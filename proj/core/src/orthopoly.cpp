#include "rkm/orthopoly.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "rkm/errors.hpp"

namespace rkm {

double evaluate(const Polynomial& poly, double x) {
  double acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> gaussian_moments(int K) {
  std::vector<double> m(static_cast<std::size_t>(K) + 1, 0.0);
  m[0] = 1.0;
  for (int k = 2; k <= K; k += 2) m[k] = m[k - 2] * (k - 1);
  return m;
}

namespace {

// Standardized entry moments E U^r, U = sqrt(p) * entry.
long double entry_moment(Family family, int r) {
  if (r % 2 == 1) return 0.0L;
  if (family == Family::RademacherIID) return 1.0L;
  long double m = 1.0L;
  for (int j = r - 1; j > 0; j -= 2) m *= j;
  return m;
}

long double factorial(int k) {
  long double f = 1.0L;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Sums, over integer partitions of k into parts >= 2, of
//   k! / (prod r_i! prod mult_j!) * p (p-1) ... (p-l+1) * prod E w^{r_i},
// which is E(sum_{i<=p} w_i)^k for iid mean-zero w_i.
long double power_sum_moment(Family family, int p, int k) {
  long double total = 0.0L;
  std::vector<int> parts;
  std::function<void(int, int)> recurse = [&](int remaining, int max_part) {
    if (remaining == 0) {
      const int l = static_cast<int>(parts.size());
      if (l > p) return;
      long double term = factorial(k);
      long double falling = 1.0L;
      for (int i = 0; i < l; ++i) {
        const long double mu = entry_moment(family, parts[i]);
        term *= mu * mu / factorial(parts[i]);
        falling *= static_cast<long double>(p - i);
      }
      for (std::size_t i = 0; i < parts.size();) {
        std::size_t j = i;
        while (j < parts.size() && parts[j] == parts[i]) ++j;
        term /= factorial(static_cast<int>(j - i));
        i = j;
      }
      total += term * falling;
      return;
    }
    for (int r = std::min(remaining, max_part); r >= 2; --r) {
      if (remaining - r == 1) continue;
      parts.push_back(r);
      recurse(remaining - r, r);
      parts.pop_back();
    }
  };
  recurse(k, k);
  return total;
}

double hadamard_scale(const Eigen::MatrixXd& m) {
  double s = 1.0;
  for (int i = 0; i < m.rows(); ++i) s *= std::abs(m(i, i));
  return s;
}

Eigen::MatrixXd hankel(const MomentSequence& moments, int j) {
  Eigen::MatrixXd h(j + 1, j + 1);
  for (int r = 0; r <= j; ++r) {
    for (int c = 0; c <= j; ++c) h(r, c) = moments.values[static_cast<std::size_t>(r + c)];
  }
  return h;
}

double checked_hankel_det(const MomentSequence& moments, int j) {
  const Eigen::MatrixXd h = hankel(moments, j);
  const double det = h.determinant();
  if (!(det > 1e-10 * hadamard_scale(h))) {
    throw DegeneracyError("Hankel determinant det M_" + std::to_string(j) + " = " + std::to_string(det) +
                          " is degenerate: measure supported on fewer than " + std::to_string(j + 1) +
                          " points or moments inconsistent");
  }
  return det;
}

}  // namespace

MomentSequence xi_moments_exact(const VectorEnsemble& ensemble, int K) {
  if (!has_iid_entries(ensemble.family)) {
    throw CapabilityError("exact xi moments need iid entries; use Monte Carlo for the sphere ensemble");
  }
  if (K < 0 || K > 16) throw ArgumentError("exact xi moments support orders 0..16");
  if (ensemble.p < 1) throw ArgumentError("ensemble dimension p must be >= 1");
  MomentSequence m;
  m.source = MomentSource::ExactCombinatorial;
  m.ensemble = ensemble;
  m.values.assign(static_cast<std::size_t>(K) + 1, 0.0);
  m.std_errors.assign(static_cast<std::size_t>(K) + 1, 0.0);
  m.values[0] = 1.0;
  for (int k = 2; k <= K; k += 2) {
    const long double scale = std::pow(static_cast<long double>(ensemble.p), static_cast<long double>(k / 2));
    m.values[static_cast<std::size_t>(k)] = static_cast<double>(power_sum_moment(ensemble.family, ensemble.p, k) / scale);
  }
  return m;
}

double sample_xi(const VectorEnsemble& ensemble, Rng& rng) {
  const double p = static_cast<double>(ensemble.p);
  switch (ensemble.family) {
    case Family::GaussianIID: {
      std::gamma_distribution<double> chi2_half(0.5 * p, 2.0);
      std::normal_distribution<double> normal;
      const double r2 = chi2_half(rng) / p;
      return normal(rng) * std::sqrt(r2);
    }
    case Family::RademacherIID: {
      std::binomial_distribution<long long> binom(ensemble.p, 0.5);
      return (2.0 * static_cast<double>(binom(rng)) - p) / std::sqrt(p);
    }
    case Family::SphereUniform: {
      if (ensemble.p == 1) return (rng() & 1ULL) ? 1.0 : -1.0;
      std::gamma_distribution<double> g(0.5 * (p - 1.0), 1.0);
      const double u = g(rng);
      const double v = g(rng);
      const double t = (u + v) > 0.0 ? (u - v) / (u + v) : 0.0;
      return std::sqrt(p) * t;
    }
  }
  return 0.0;
}

MomentSequence xi_moments_monte_carlo(const VectorEnsemble& ensemble, int K, long long samples, std::uint64_t seed) {
  if (K < 0) throw ArgumentError("moment order must be >= 0");
  if (samples < 2) throw ArgumentError("Monte Carlo moments need at least 2 samples");
  if (ensemble.p < 1) throw ArgumentError("ensemble dimension p must be >= 1");
  std::vector<double> sum(static_cast<std::size_t>(K) + 1, 0.0);
  std::vector<double> sum_sq(static_cast<std::size_t>(K) + 1, 0.0);
  Rng rng = make_rng(seed, streams::kXi, 0);
  for (long long s = 0; s < samples; ++s) {
    const double xi = sample_xi(ensemble, rng);
    double pw = 1.0;
    for (int k = 0; k <= K; ++k) {
      sum[static_cast<std::size_t>(k)] += pw;
      sum_sq[static_cast<std::size_t>(k)] += pw * pw;
      pw *= xi;
    }
  }
  MomentSequence m;
  m.source = MomentSource::MonteCarlo;
  m.samples = samples;
  m.ensemble = ensemble;
  const double n = static_cast<double>(samples);
  for (int k = 0; k <= K; ++k) {
    const double mean = sum[static_cast<std::size_t>(k)] / n;
    const double var = std::max(0.0, sum_sq[static_cast<std::size_t>(k)] / n - mean * mean);
    m.values.push_back(mean);
    m.std_errors.push_back(std::sqrt(var / n));
  }
  m.values[0] = 1.0;
  m.std_errors[0] = 0.0;
  return m;
}

MomentSequence xi_moments(const VectorEnsemble& ensemble, int K, long long mc_samples, std::uint64_t seed) {
  if (has_iid_entries(ensemble.family) && K <= 16) return xi_moments_exact(ensemble, K);
  return xi_moments_monte_carlo(ensemble, K, mc_samples, seed);
}

Polynomial hermite(int k) {
  if (k < 0) throw ArgumentError("Hermite degree must be >= 0");
  Polynomial prev{1.0};
  if (k == 0) return prev;
  Polynomial cur{0.0, 1.0};
  // h_{j+1} = (x h_j - sqrt(j) h_{j-1}) / sqrt(j+1)
  for (int j = 1; j < k; ++j) {
    Polynomial next(static_cast<std::size_t>(j) + 2, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= std::sqrt(static_cast<double>(j)) * prev[i];
    for (double& c : next) c /= std::sqrt(static_cast<double>(j + 1));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Polynomial orthopoly_from_moments(const MomentSequence& moments, int k) {
  if (k < 0) throw ArgumentError("polynomial degree must be >= 0");
  if (moments.max_order() < 2 * k) {
    throw ArgumentError("degree " + std::to_string(k) + " needs moments up to order " + std::to_string(2 * k));
  }
  double det_prev = 1.0;  // det M_{-1}
  for (int j = 0; j < k; ++j) det_prev = checked_hankel_det(moments, j);
  const double det_k = checked_hankel_det(moments, k);
  const double c_k = 1.0 / std::sqrt(det_prev * det_k);

  if (k == 0) return {c_k * det_prev};

  // Rows 0..k-1 of the bordered matrix are Hankel rows; the last row is the
  // monomials, so the coefficient of x^j is the (k, j) cofactor.
  Eigen::MatrixXd top(k, k + 1);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c <= k; ++c) top(r, c) = moments.values[static_cast<std::size_t>(r + c)];
  }
  Polynomial poly(static_cast<std::size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    Eigen::MatrixXd minor(k, k);
    for (int c = 0, cc = 0; c <= k; ++c) {
      if (c == j) continue;
      minor.col(cc++) = top.col(c);
    }
    const double sign = ((k + j) % 2 == 0) ? 1.0 : -1.0;
    poly[static_cast<std::size_t>(j)] = c_k * sign * minor.determinant();
  }
  poly.back() = c_k * det_prev;
  return poly;
}

OrthoBasis build_basis(const MomentSequence& moments, int degree) {
  if (degree < 0 || degree > kMaxBasisDegree) {
    throw ArgumentError("basis degree must be in 0.." + std::to_string(kMaxBasisDegree));
  }
  OrthoBasis basis;
  basis.degree = degree;
  for (int k = 0; k <= degree; ++k) {
    basis.polys.push_back(orthopoly_from_moments(moments, k));
    basis.hankel_dets.push_back(hankel(moments, k).determinant());
  }
  return basis;
}

Eigen::MatrixXd moment_gram(const OrthoBasis& basis, const MomentSequence& moments) {
  const int d = basis.degree;
  if (moments.max_order() < 2 * d) throw ArgumentError("moment_gram needs moments up to order 2*degree");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      double s = 0.0;
      const auto& pi = basis.polys[static_cast<std::size_t>(i)];
      const auto& pj = basis.polys[static_cast<std::size_t>(j)];
      for (std::size_t a = 0; a < pi.size(); ++a) {
        for (std::size_t b = 0; b < pj.size(); ++b) s += pi[a] * pj[b] * moments.values[a + b];
      }
      g(i, j) = s;
    }
  }
  return g;
}

double hermite_deviation(const OrthoBasis& basis, int k, std::span<const double> grid) {
  if (k < 0 || k > basis.degree) throw ArgumentError("hermite_deviation degree exceeds the basis degree");
  const Polynomial h = hermite(k);
  const Polynomial& pk = basis.polys[static_cast<std::size_t>(k)];
  double worst = 0.0;
  for (double x : grid) {
    worst = std::max(worst, std::abs(evaluate(pk, x) - evaluate(h, x)) / (1.0 + std::pow(std::abs(x), k)));
  }
  return worst;
}

AdmissibleParams envelope_coeffs(const Envelope& f, const VectorEnsemble& ensemble, int L, long long samples,
                                 std::uint64_t seed) {
  if (L < 1 || L > kMaxBasisDegree) throw ArgumentError("truncation degree L must be in 1.." + std::to_string(kMaxBasisDegree));
  if (samples < 100) throw ArgumentError("envelope_coeffs needs at least 100 samples");

  const MomentSequence moments = xi_moments(ensemble, 2 * L, samples, derive_seed(seed, streams::kMoments, 1));
  AdmissibleParams out;
  out.p = ensemble.p;
  out.L = L;
  out.samples = samples;
  out.basis = build_basis(moments, L);

  const double root_p = std::sqrt(static_cast<double>(ensemble.p));
  const auto L1 = static_cast<std::size_t>(L) + 1;
  // Sums of (k - center) * p_j: the center, the mean of the first batch,
  // removes the a_0 contribution from the variance of the j >= 1 estimates.
  std::vector<double> sum(L1, 0.0);
  std::vector<double> sum_sq(L1, 0.0);
  double center = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;

  Rng rng = make_rng(seed, streams::kXi, 2);
  std::vector<double> xis;
  std::vector<double> kvals;
  constexpr long long kBatch = 1 << 16;
  for (long long done = 0; done < samples;) {
    const long long batch = std::min(kBatch, samples - done);
    xis.clear();
    kvals.clear();
    for (long long s = 0; s < batch; ++s) {
      const double xi = sample_xi(ensemble, rng);
      const double kv = root_p * f(xi / root_p, ensemble.p);
      if (!std::isfinite(kv)) {
        throw EvaluationError("k(x, p) is non-finite at x=" + std::to_string(xi) + " for envelope '" + f.name + "'");
      }
      xis.push_back(xi);
      kvals.push_back(kv);
    }
    if (done == 0) {
      for (double kv : kvals) center += kv;
      center /= static_cast<double>(kvals.size());
    }
    for (std::size_t s = 0; s < kvals.size(); ++s) {
      const double d = kvals[s] - center;
      s1 += d;
      s2 += d * d;
      s3 += d * d * d;
      s4 += d * d * d * d;
      sum[0] += d;
      sum_sq[0] += d * d;
      for (std::size_t j = 1; j < L1; ++j) {
        const double t = d * evaluate(out.basis.polys[j], xis[s]);
        sum[j] += t;
        sum_sq[j] += t * t;
      }
    }
    done += batch;
  }

  const double n = static_cast<double>(samples);
  out.coeffs.resize(L1);
  out.std_errors.resize(L1);
  for (std::size_t j = 0; j < L1; ++j) {
    const double mean = sum[j] / n;
    out.coeffs[j] = mean;
    out.std_errors[j] = std::sqrt(std::max(0.0, sum_sq[j] / n - mean * mean) / n);
  }
  out.coeffs[0] += center;
  out.a = out.coeffs[1];

  const double delta = s1 / n;
  const double m2 = s2 / n - delta * delta;
  out.nu_raw = std::max(0.0, m2 * n / (n - 1.0));
  // Var of the sample variance ~ (mu4 - sigma^4) / n.
  const double m4 = s4 / n - 4.0 * delta * s3 / n + 6.0 * delta * delta * s2 / n - 3.0 * std::pow(delta, 4);
  out.nu_std_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);

  double explained = 0.0;
  for (std::size_t j = 1; j < L1; ++j) explained += out.coeffs[j] * out.coeffs[j];
  const double raw_tail = out.nu_raw - explained;
  double tail_se = out.nu_std_error;
  for (std::size_t j = 1; j < L1; ++j) tail_se = std::hypot(tail_se, 2.0 * out.coeffs[j] * out.std_errors[j]);
  out.inconsistent = raw_tail < -3.0 * tail_se;
  out.nu = std::max(out.nu_raw, explained);
  out.tail_mass = out.nu - explained;
  return out;
}

Envelope truncated_envelope(const AdmissibleParams& params) {
  const AdmissibleParams captured = params;
  Envelope env;
  env.name = "truncated:L=" + std::to_string(params.L);
  env.p_dependent = true;
  env.eval = [captured](double x, int p) {
    const double root_p = std::sqrt(static_cast<double>(p));
    const double xi = root_p * x;
    double s = 0.0;
    for (int j = 0; j <= captured.L; ++j) {
      s += captured.coeffs[static_cast<std::size_t>(j)] * evaluate(captured.basis.polys[static_cast<std::size_t>(j)], xi);
    }
    return s / root_p;
  };
  return env;
}

std::string to_key_value(const AdmissibleParams& params) {
  std::ostringstream os;
  os << std::setprecision(17) << "p = " << params.p << "\nL = " << params.L << "\na = " << params.a
     << "\nnu = " << params.nu << "\nnu_raw = " << params.nu_raw << "\nnu_std_error = " << params.nu_std_error
     << "\ntail_mass = " << params.tail_mass << "\ninconsistent = " << (params.inconsistent ? "true" : "false")
     << "\nsamples = " << params.samples << '\n';
  for (std::size_t k = 0; k < params.coeffs.size(); ++k) os << "a_" << k << " = " << params.coeffs[k] << '\n';
  return os.str();
}

}  // namespace rkm
