#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rkm/errors.hpp"
#include "rkm/limit_solver.hpp"

using namespace rkm;

namespace {

std::vector<Complex> z_grid() {
  std::vector<Complex> g;
  for (double re : {-3.0, -1.0, -0.2, 0.0, 0.5, 1.5, 4.0})
    for (double im : {0.01, 0.2, 1.0, 4.0}) g.emplace_back(re, im);
  return g;
}

// a = 0: -1/m = z + (nu/gamma) m, a semicircle of variance s^2 = nu/gamma.
Complex scaled_semicircle(double s2, Complex z) {
  const double s = std::sqrt(s2);
  return oracle::semicircle_stieltjes(z / s) / s;
}

double semicircle_cdf(double s2, double x) {
  const double s = std::sqrt(s2);
  const double t = std::clamp(x / (2.0 * s), -1.0, 1.0);
  return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / M_PI;
}

}  // namespace

TEST(SolvePoint, SemicircleAtI) {
  // Unit semicircle: m(i) = i (sqrt(5) - 1) / 2.
  const Complex m = solve_point({0.0, 1.0, 1.0}, Complex(0.0, 1.0));
  EXPECT_NEAR(m.real(), 0.0, 1e-12);
  EXPECT_NEAR(m.imag(), (std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
}

TEST(SolvePoint, SemicircleOnGrid) {
  for (double nu : {0.5, 1.0, 3.0}) {
    for (double gamma : {0.5, 1.0, 2.0}) {
      for (const Complex& z : z_grid()) {
        const Complex m = solve_point({0.0, nu, gamma}, z);
        EXPECT_LT(std::abs(m - scaled_semicircle(nu / gamma, z)), 1e-9) << nu << " " << gamma << " " << z;
      }
    }
  }
}

TEST(SolvePoint, PureLinearCaseIsAffineMp) {
  // nu = a^2 leaves a (G - I) with G ~ MP(gamma): m(z) = (1/a) m_MP((z + a)/a).
  for (double a : {0.5, 1.0, 2.0}) {
    for (double gamma : {0.5, 2.0}) {
      for (const Complex& z : {Complex(-0.5, 0.3), Complex(1.0, 0.5), Complex(3.0, 1.0)}) {
        const Complex m = solve_point({a, a * a, gamma}, z);
        const Complex ref = oracle::mp_stieltjes(gamma, (z + a) / a) / a;
        EXPECT_LT(std::abs(m - ref), 1e-6) << a << " " << gamma << " " << z;
      }
    }
  }
}

TEST(SolvePoint, ResidualAndHerglotz) {
  for (const LimitParams& p : {LimitParams{0.8, 1.0, 0.5}, LimitParams{0.3, 2.0, 3.0}, LimitParams{1.0, 1.0, 1.0},
                               LimitParams{0.0, 0.5, 2.0}}) {
    for (const Complex& z : z_grid()) {
      const Complex m = solve_point(p, z);
      EXPECT_GT(m.imag(), 0.0);
      EXPECT_LE(std::abs(m), 1.0 / z.imag() * (1.0 + 1e-9));
      EXPECT_LT(equation_residual(p, z, m), 1e-10);
    }
  }
}

TEST(SolvePoint, TailBehaviour) {
  const LimitParams p{0.7, 1.2, 1.5};
  for (const Complex& z : {Complex(0.0, 1e6), Complex(1e6, 1.0), Complex(-7e5, 7e5)}) {
    const Complex m = solve_point(p, z);
    EXPECT_LT(std::abs(m - (-1.0 / z)) / std::abs(1.0 / z), 1e-6) << z;
  }
}

TEST(SolvePoint, WarmStartFindsSameRoot) {
  const LimitParams p{0.8, 1.0, 0.5};
  for (const Complex& z : z_grid()) {
    const Complex cold = solve_point(p, z);
    const Complex warm = solve_point(p, z, cold + Complex(0.01, 0.01));
    EXPECT_LT(std::abs(cold - warm), 1e-10) << z;
  }
}

TEST(SolvePoint, RejectsBadInput) {
  EXPECT_THROW(solve_point({-0.1, 1.0, 1.0}, Complex(0, 1)), ArgumentError);
  EXPECT_THROW(solve_point({1.5, 1.0, 1.0}, Complex(0, 1)), ArgumentError);
  EXPECT_THROW(solve_point({0.5, 1.0, 0.0}, Complex(0, 1)), ArgumentError);
  EXPECT_THROW(solve_point({0.5, 1.0, 1.0}, Complex(0, 0)), ArgumentError);
  EXPECT_THROW(solve_point({0.5, 1.0, 1.0}, Complex(0, -1)), ArgumentError);
}

TEST(SolveGrid, SemicircleMassSymmetryMedian) {
  const LimitLaw law = solve_grid({0.0, 1.0, 1.0});
  EXPECT_NEAR(law.total_mass(), 1.0, 1e-3);
  EXPECT_TRUE(law.atoms.empty());
  // Symmetric grid around 0, symmetric density.
  const std::size_t n = law.x.size();
  for (std::size_t i = 0; i < n / 2; i += 97) {
    EXPECT_NEAR(law.density[i], law.density[n - 1 - i], 1e-8) << law.x[i];
  }
  EXPECT_NEAR(law_cdf(law, 0.0), 0.5, 2e-3);
  for (double x : {-1.5, -0.5, 0.7, 1.9}) EXPECT_NEAR(law_cdf(law, x), semicircle_cdf(1.0, x), 5e-3) << x;
}

TEST(SolveGrid, CdfIsMonotoneAndBounded) {
  const LimitLaw law = solve_grid({0.8, 1.0, 0.5});
  EXPECT_DOUBLE_EQ(law_cdf(law, law.x.front() - 1.0), 0.0);
  EXPECT_DOUBLE_EQ(law_cdf(law, law.x.back() + 1.0), 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = law.x.front() + (law.x.back() - law.x.front()) * i / 2000.0;
    const double f = law_cdf(law, x);
    EXPECT_GE(f, prev - 1e-15);
    EXPECT_LE(f, 1.0);
    EXPECT_LE(law_cdf_left(law, x), f);
    prev = f;
  }
}

TEST(SolveGrid, HalvingEpsilonConverges) {
  const LimitParams p{0.0, 1.0, 1.0};
  auto max_err = [&](double eps) {
    GridOptions o;
    o.epsilon = eps;
    o.x_range = std::make_pair(-3.0, 3.0);
    const LimitLaw law = solve_grid(p, o);
    double e = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double x = -2.5 + 5.0 * i / 60.0;
      e = std::max(e, std::abs(law_cdf(law, x) - semicircle_cdf(1.0, x)));
    }
    return e;
  };
  const double coarse = max_err(4e-2);
  const double fine = max_err(2e-2);
  EXPECT_LT(fine, coarse);
}

TEST(SolveGrid, SignScaledLawHasUnitMass) {
  const LimitLaw law = solve_grid({std::sqrt(2.0 / M_PI), 1.0, 1.0});
  EXPECT_NEAR(law.total_mass(), 1.0, 1e-3);
  EXPECT_TRUE(law.atoms.empty());
}

TEST(SolveGrid, HalvingEpsilonMovesSmoothCdfLittle) {
  const LimitParams p{std::sqrt(2.0 / M_PI), 1.0, 1.0};
  GridOptions o;
  o.x_range = std::make_pair(-4.0, 4.0);
  const LimitLaw coarse = solve_grid(p, o);
  o.epsilon /= 2.0;
  const LimitLaw fine = solve_grid(p, o);
  for (double x : {-1.5, -0.7, 0.0, 0.4, 1.2, 2.0}) EXPECT_LT(std::abs(law_cdf(coarse, x) - law_cdf(fine, x)), 1e-3) << x;
}

TEST(SolveGrid, FindsMpAtom) {
  // a = nu = 1, gamma = 0.5: the law of G - I with an atom of 1/2 at -1.
  const LimitLaw law = solve_grid({1.0, 1.0, 0.5});
  ASSERT_EQ(law.atoms.size(), 1u);
  EXPECT_NEAR(law.atoms[0].location, -1.0, 1e-4);
  EXPECT_NEAR(law.atoms[0].mass, 0.5, 1e-3);
  // The located atom is only known to ~1e-4, so probe either side of it.
  EXPECT_NEAR(law_cdf(law, -1.0 + 1e-3), 0.5, 2e-3);
  EXPECT_NEAR(law_cdf(law, -1.0 - 1e-3), 0.0, 2e-3);
  EXPECT_NEAR(law_cdf_left(law, law.atoms[0].location), law_cdf(law, law.atoms[0].location) - 0.5, 2e-3);
  EXPECT_NEAR(law.total_mass(), 1.0, 1e-3);
  EXPECT_EQ(law.view().atoms.size(), 1u);
}

TEST(SolveGrid, RejectsBadOptions) {
  GridOptions o;
  o.epsilon = 0.0;
  EXPECT_THROW(solve_grid({0.0, 1.0, 1.0}, o), ArgumentError);
  o.epsilon = 1e-3;
  o.n_points = 2;
  EXPECT_THROW(solve_grid({0.0, 1.0, 1.0}, o), ArgumentError);
  o.n_points = 101;
  o.x_range = std::make_pair(1.0, 1.0);
  EXPECT_THROW(solve_grid({0.0, 1.0, 1.0}, o), ArgumentError);
}

TEST(SolveGrid, NarrowRangeIsWidened) {
  GridOptions o;
  o.x_range = std::make_pair(-0.5, 0.5);
  o.n_points = 801;
  const LimitLaw law = solve_grid({0.0, 1.0, 1.0}, o);
  EXPECT_GE(1.0 - law.total_mass(), -1e-9);
  EXPECT_LE(1.0 - law.total_mass(), o.max_mass_deficit);
  EXPECT_LT(law.x.front(), -2.0);
}

TEST(Shifted, MovesGridAtomsAndTransform) {
  const LimitLaw law = solve_grid({1.0, 1.0, 0.5});
  const LimitLaw moved = shifted(law, 0.25);
  EXPECT_DOUBLE_EQ(moved.x.front(), law.x.front() + 0.25);
  EXPECT_NEAR(moved.atoms[0].location, law.atoms[0].location + 0.25, 1e-15);
  EXPECT_NEAR(law_cdf(moved, 0.3), law_cdf(law, 0.05), 1e-12);
  const Complex z(0.4, 0.3);
  EXPECT_LT(std::abs(moved.stieltjes(z) - law.stieltjes(z - 0.25)), 1e-12);
}

TEST(LawCsv, WritesTableAndMeta) {
  GridOptions o;
  o.n_points = 101;
  const LimitLaw law = shifted(solve_grid({0.5, 1.0, 2.0}, o), -0.1);
  const auto path = std::filesystem::temp_directory_path() / "rkm_law_test.csv";
  write_law_csv(path, law);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,density,cdf,re_m,im_m");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(law.x.size()));
  std::ifstream meta(path.string() + ".meta");
  const std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("type = functional-equation"), std::string::npos);
  EXPECT_NE(text.find("shift = -0.1"), std::string::npos);
  EXPECT_NE(text.find("gamma = 2"), std::string::npos);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".meta");
}

TEST(KeyValue, ParsesExpandRecord) {
  const LimitParams p = limit_params_from_key_value("# comment\np = 200\na = 0.75\nnu = 1.25\na_0 = 3\n", 2.0);
  EXPECT_DOUBLE_EQ(p.a, 0.75);
  EXPECT_DOUBLE_EQ(p.nu, 1.25);
  EXPECT_DOUBLE_EQ(p.gamma, 2.0);
  EXPECT_THROW(limit_params_from_key_value("a = 0.5\n", 1.0), ArgumentError);
  EXPECT_THROW(limit_params_from_key_value("nu = 0.5\n", 1.0), ArgumentError);
  EXPECT_THROW(limit_params_from_key_value("a = x\nnu = 1\n", 1.0), ArgumentError);
  EXPECT_THROW(limit_params_from_key_value("a = 2\nnu = 1\n", 1.0), ArgumentError);
}
