#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rkm/errors.hpp"
#include "rkm/orthopoly.hpp"

using namespace rkm;

namespace {

MomentSequence from_values(std::vector<double> values) {
  MomentSequence m;
  m.std_errors.assign(values.size(), 0.0);
  m.values = std::move(values);
  return m;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

Envelope quadratic_envelope() {
  Envelope f;
  f.name = "2x+x^2/2";
  f.eval = [](double x, int) { return 2.0 * x + 0.5 * x * x; };
  return f;
}

}  // namespace

TEST(Moments, GaussianStandardMoments) {
  const auto m = gaussian_moments(8);
  const std::vector<double> expect{1, 0, 1, 0, 3, 0, 15, 0, 105};
  EXPECT_EQ(m, expect);
}

TEST(Moments, ExactGaussianMatchesChiSquareFormula) {
  for (int p : {1, 3, 10, 100}) {
    const MomentSequence m = xi_moments_exact({Family::GaussianIID, p}, 16);
    ASSERT_EQ(m.max_order(), 16);
    EXPECT_EQ(m.source, MomentSource::ExactCombinatorial);
    for (int k = 0; k <= 16; ++k) {
      const double ref = static_cast<double>(oracle::gaussian_xi_moment(p, k));
      EXPECT_NEAR(m.values[k], ref, 1e-10 * std::max(1.0, ref)) << "p=" << p << " k=" << k;
    }
  }
}

TEST(Moments, ExactRademacherMatchesBinomialSum) {
  for (int p : {1, 2, 5, 40}) {
    const MomentSequence m = xi_moments_exact({Family::RademacherIID, p}, 16);
    for (int k = 0; k <= 16; ++k) {
      const double ref = static_cast<double>(oracle::rademacher_xi_moment(p, k));
      EXPECT_NEAR(m.values[k], ref, 1e-10 * std::max(1.0, ref)) << "p=" << p << " k=" << k;
    }
  }
}

TEST(Moments, FourthMomentExamples) {
  EXPECT_NEAR(xi_moments_exact({Family::GaussianIID, 10}, 4).values[4], 3.0 * 12.0 / 10.0, 1e-12);
  EXPECT_NEAR(xi_moments_exact({Family::RademacherIID, 10}, 4).values[4], 3.0 - 2.0 / 10.0, 1e-12);
  EXPECT_NEAR(xi_moments_exact({Family::RademacherIID, 1}, 4).values[4], 1.0, 1e-15);
}

TEST(Moments, ExactRejectsSphereAndBadOrders) {
  EXPECT_THROW(xi_moments_exact({Family::SphereUniform, 10}, 4), CapabilityError);
  EXPECT_THROW(xi_moments_exact({Family::GaussianIID, 10}, 17), ArgumentError);
  EXPECT_THROW(xi_moments_exact({Family::GaussianIID, 0}, 4), ArgumentError);
}

TEST(Moments, SphereMonteCarloFourthMoment) {
  // xi = sqrt(p) u_1 for uniform u on the sphere: E xi^4 = 3p / (p + 2).
  const int p = 20;
  const MomentSequence m = xi_moments({Family::SphereUniform, p}, 4, 400000, 5);
  EXPECT_EQ(m.source, MomentSource::MonteCarlo);
  EXPECT_NEAR(m.values[2], 1.0, 5.0 * m.std_errors[2]);
  EXPECT_NEAR(m.values[4], 3.0 * p / (p + 2.0), 5.0 * m.std_errors[4]);
}

TEST(Moments, MonteCarloAgreesWithExact) {
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    const VectorEnsemble e{f, 7};
    const MomentSequence mc = xi_moments_monte_carlo(e, 6, 300000, 8);
    const MomentSequence ex = xi_moments_exact(e, 6);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(mc.values[k], ex.values[k], 5.0 * mc.std_errors[k] + 1e-12) << k;
  }
  EXPECT_THROW(xi_moments_monte_carlo({Family::GaussianIID, 5}, 4, 1, 1), ArgumentError);
}

TEST(Hermite, LowDegreeExamples) {
  EXPECT_EQ(hermite(0), (Polynomial{1.0}));
  EXPECT_EQ(hermite(1), (Polynomial{0.0, 1.0}));
  const Polynomial h2 = hermite(2);
  ASSERT_EQ(h2.size(), 3u);
  EXPECT_NEAR(h2[0], -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(h2[1], 0.0, 1e-15);
  EXPECT_NEAR(h2[2], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(evaluate(hermite(3), 2.0), (8.0 - 6.0) / std::sqrt(6.0), 1e-14);
  EXPECT_THROW(hermite(-1), ArgumentError);
}

TEST(Hermite, GramSchmidtOfMonomials) {
  // h2 from x^2 minus its projections onto 1 and x, under E N^k.
  const auto m = gaussian_moments(4);
  const double proj1 = m[2];
  const double norm2 = m[4] - 2.0 * proj1 * m[2] + proj1 * proj1;
  for (double x : {-1.5, 0.0, 0.7, 3.0}) {
    EXPECT_NEAR(evaluate(hermite(2), x), (x * x - proj1) / std::sqrt(norm2), 1e-14);
  }
}

TEST(Hermite, ThreeTermRecurrence) {
  // x h_k = sqrt(k+1) h_{k+1} + sqrt(k) h_{k-1}.
  for (int k = 1; k < 8; ++k) {
    for (double x : grid(-4.0, 4.0, 17)) {
      const double lhs = x * evaluate(hermite(k), x);
      const double rhs = std::sqrt(k + 1.0) * evaluate(hermite(k + 1), x) + std::sqrt(static_cast<double>(k)) *
                                                                              evaluate(hermite(k - 1), x);
      EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::pow(std::abs(x), k + 1))) << k << " " << x;
    }
  }
}

TEST(Orthopoly, GaussianMomentsGiveHermite) {
  const MomentSequence m = from_values(gaussian_moments(16));
  for (int k = 0; k <= kMaxBasisDegree; ++k) {
    const Polynomial p = orthopoly_from_moments(m, k);
    const Polynomial h = hermite(k);
    ASSERT_EQ(p.size(), h.size());
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(p[i], h[i], 1e-8) << k << " " << i;
  }
}

TEST(Orthopoly, FirstPolynomialIsIdentity) {
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    const Polynomial p1 = orthopoly_from_moments(xi_moments_exact({f, 9}, 4), 1);
    ASSERT_EQ(p1.size(), 2u);
    EXPECT_NEAR(p1[0], 0.0, 1e-14);
    EXPECT_NEAR(p1[1], 1.0, 1e-14);
  }
}

TEST(Orthopoly, TwoPointLawIsDegenerateAtDegreeTwo) {
  // p = 1 Rademacher: xi = +-1, only two support points.
  const MomentSequence m = xi_moments_exact({Family::RademacherIID, 1}, 4);
  EXPECT_NO_THROW(orthopoly_from_moments(m, 1));
  try {
    orthopoly_from_moments(m, 2);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("fewer than"), std::string::npos);
  }
}

TEST(Orthopoly, NeedsEnoughMoments) {
  EXPECT_THROW(orthopoly_from_moments(from_values(gaussian_moments(3)), 2), ArgumentError);
  EXPECT_THROW(build_basis(from_values(gaussian_moments(20)), kMaxBasisDegree + 1), ArgumentError);
}

TEST(Orthopoly, BasisIsOrthonormalWithPositiveLeadingCoefficient) {
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    const MomentSequence m = xi_moments_exact({f, 12}, 12);
    const OrthoBasis basis = build_basis(m, 6);
    ASSERT_EQ(basis.polys.size(), 7u);
    const Eigen::MatrixXd g = moment_gram(basis, m);
    EXPECT_LT((g - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-8);
    for (int k = 0; k <= 6; ++k) {
      EXPECT_GT(basis.polys[k].back(), 0.0);
      EXPECT_GT(basis.hankel_dets[k], 0.0);
    }
  }
}

TEST(Orthopoly, HermiteDeviationExamples) {
  const auto g = grid(-3.0, 3.0, 61);
  const OrthoBasis exact = build_basis(from_values(gaussian_moments(16)), 4);
  for (int k = 0; k <= 4; ++k) EXPECT_LT(hermite_deviation(exact, k, g), 1e-8);
  EXPECT_THROW(hermite_deviation(exact, 5, g), ArgumentError);
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    EXPECT_LT(hermite_deviation(build_basis(xi_moments_exact({f, 3}, 4), 2), 1, g), 1e-14);
  }

  // Rademacher p_2: m_4 = 3 - 2/p, so p_2 = (x^2 - 1) / sqrt(2 - 2/p).
  const int p = 10;
  const OrthoBasis rad = build_basis(xi_moments_exact({Family::RademacherIID, p}, 4), 2);
  for (double x : {0.0, 1.3, -2.0}) {
    EXPECT_NEAR(evaluate(rad.polys[2], x), (x * x - 1.0) / std::sqrt(2.0 - 2.0 / p), 1e-12);
  }
}

TEST(Orthopoly, DeviationFromHermiteShrinksWithP) {
  // The moments of xi_p differ from Gaussian ones by O(1/p), and so do the
  // polynomials.
  const auto g = grid(-3.0, 3.0, 61);
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    double prev = INFINITY;
    for (int p : {10, 100, 1000}) {
      const OrthoBasis b = build_basis(xi_moments_exact({f, p}, 8), 4);
      const double d = hermite_deviation(b, 4, g);
      EXPECT_LT(d, prev);
      EXPECT_LT(d, 20.0 / p);
      prev = d;
    }
  }
}

TEST(EnvelopeCoeffs, LinearEnvelope) {
  // k(xi) = xi exactly; a_1 = E xi^2 = 1, a_0 = 0.
  const AdmissibleParams r = envelope_coeffs(make_envelope("identity"), {Family::GaussianIID, 50}, 3, 100000, 2);
  EXPECT_NEAR(r.coeffs[0], 0.0, 5.0 * r.std_errors[0] + 1e-12);
  EXPECT_NEAR(r.a, 1.0, 5.0 * r.std_errors[1] + 0.02);
  EXPECT_NEAR(r.nu, 1.0, 5.0 * r.nu_std_error);
  for (int k = 2; k <= 3; ++k) EXPECT_NEAR(r.coeffs[k], 0.0, 5.0 * r.std_errors[k] + 1e-3);
  EXPECT_FALSE(r.inconsistent);
}

TEST(EnvelopeCoeffs, SignScaled) {
  // k = sign(xi): a = E|xi| -> sqrt(2/pi), nu -> 1.
  const AdmissibleParams r = envelope_coeffs(make_envelope("sign-scaled"), {Family::GaussianIID, 2000}, 3, 400000, 4);
  EXPECT_NEAR(r.a, std::sqrt(2.0 / M_PI), 5.0 * r.std_errors[1] + 1e-3);
  EXPECT_NEAR(r.nu, 1.0, 5.0 * r.nu_std_error + 1e-3);
  EXPECT_NEAR(r.coeffs[2], 0.0, 5.0 * r.std_errors[2]);
  // a_3 = E sign(N) h_3(N) = -sqrt(2/pi) / sqrt(6), so the tail past L = 3 is
  // 1 - (2/pi)(1 + 1/6).
  EXPECT_NEAR(r.coeffs[3], -std::sqrt(2.0 / M_PI / 6.0), 5.0 * r.std_errors[3] + 2e-3);
  EXPECT_NEAR(r.tail_mass, 1.0 - 2.0 / M_PI * (7.0 / 6.0), 0.01);
}

TEST(EnvelopeCoeffs, BesselAndPlancherel) {
  // sum_{k>=1} a_k^2 <= Var k, with near equality for a polynomial of
  // degree <= L.
  for (const char* name : {"exp:a=1", "sign-scaled", "nonsmooth-sin"}) {
    const AdmissibleParams r = envelope_coeffs(make_envelope(name), {Family::RademacherIID, 64}, 4, 100000, 6);
    double explained = 0.0;
    for (int k = 1; k <= 4; ++k) {
      EXPECT_LE(std::abs(r.coeffs[k]), std::sqrt(r.nu) + 1e-12) << name;
      explained += r.coeffs[k] * r.coeffs[k];
    }
    EXPECT_LE(r.a * r.a, r.nu + 1e-12) << name;
    EXPECT_GE(r.tail_mass, 0.0) << name;
    EXPECT_NEAR(r.nu - explained, r.tail_mass, 1e-12) << name;
  }
  const AdmissibleParams q = envelope_coeffs(quadratic_envelope(), {Family::GaussianIID, 25}, 2, 200000, 9);
  EXPECT_LT(q.tail_mass, 5.0 * q.nu_std_error);
  EXPECT_NEAR(q.a, 2.0, 5.0 * q.std_errors[1] + 0.02);
}

TEST(EnvelopeCoeffs, Errors) {
  const Envelope f = make_envelope("exp:a=1");
  const VectorEnsemble e{Family::GaussianIID, 10};
  EXPECT_THROW(envelope_coeffs(f, e, 0, 1000, 1), ArgumentError);
  EXPECT_THROW(envelope_coeffs(f, e, kMaxBasisDegree + 1, 1000, 1), ArgumentError);
  EXPECT_THROW(envelope_coeffs(f, e, 2, 99, 1), ArgumentError);
  EXPECT_THROW(envelope_coeffs(make_envelope("exp:a=1000"), {Family::GaussianIID, 1}, 2, 1000, 1), EvaluationError);
}

TEST(EnvelopeCoeffs, DeterministicAndKeyValue) {
  const AdmissibleParams a = envelope_coeffs(make_envelope("exp:a=1"), {Family::GaussianIID, 30}, 3, 5000, 77);
  const AdmissibleParams b = envelope_coeffs(make_envelope("exp:a=1"), {Family::GaussianIID, 30}, 3, 5000, 77);
  EXPECT_EQ(a.coeffs, b.coeffs);
  EXPECT_EQ(a.nu, b.nu);
  const std::string kv = to_key_value(a);
  for (const char* key : {"p = 30", "L = 3", "samples = 5000", "a_0 = ", "a_3 = ", "nu = ", "tail_mass = "}) {
    EXPECT_NE(kv.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(kv.find("a_4 = "), std::string::npos);
}

TEST(EnvelopeCoeffs, TruncatedEnvelopeReproducesPolynomial) {
  const int p = 25;
  const AdmissibleParams r = envelope_coeffs(quadratic_envelope(), {Family::GaussianIID, p}, 2, 200000, 3);
  const Envelope t = truncated_envelope(r);
  EXPECT_TRUE(t.p_dependent);
  const Envelope f = quadratic_envelope();
  for (double x : {-0.3, 0.0, 0.1, 0.4}) EXPECT_NEAR(t(x, p), f(x, p), 0.01) << x;
}
