#include <algorithm>
#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "rkm/ensembles.hpp"
#include "rkm/errors.hpp"

using namespace rkm;

TEST(SampleMatrix, SphereColumnsHaveUnitNorm) {
  const SampleMatrix s = sample_matrix({Family::SphereUniform, 10}, 5, 1);
  ASSERT_EQ(s.p(), 10);
  ASSERT_EQ(s.n(), 5);
  for (int j = 0; j < s.n(); ++j) EXPECT_NEAR(s.data.col(j).norm(), 1.0, 1e-15);
}

TEST(SampleMatrix, RademacherEntriesArePlusMinusHalfAtPFour) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const SampleMatrix s = sample_matrix({Family::RademacherIID, 4}, 1, seed);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(std::abs(s.data(i, 0)), 0.5);
  }
}

TEST(SampleMatrix, GaussianGrandMeanWithinCltBound) {
  const int p = 1000;
  const int n = 1000;
  const SampleMatrix s = sample_matrix({Family::GaussianIID, p}, n, 7);
  const double bound = 4.0 / std::sqrt(static_cast<double>(n) * p) / std::sqrt(static_cast<double>(p));
  EXPECT_LT(std::abs(s.data.mean()), bound);
}

TEST(SampleMatrix, DeterministicInSeed) {
  for (Family f : {Family::GaussianIID, Family::RademacherIID, Family::SphereUniform}) {
    const SampleMatrix a = sample_matrix({f, 30}, 20, 12345);
    const SampleMatrix b = sample_matrix({f, 30}, 20, 12345);
    const SampleMatrix c = sample_matrix({f, 30}, 20, 12346);
    EXPECT_TRUE(a.data == b.data);
    EXPECT_FALSE(a.data == c.data);
  }
}

TEST(SampleMatrix, ColumnsRegenerateIndependently) {
  const VectorEnsemble ens{Family::GaussianIID, 17};
  const SampleMatrix s = sample_matrix(ens, 9, 42);
  for (int j = 8; j >= 0; --j) EXPECT_TRUE(sample_column(ens, 42, j) == s.data.col(j));
  // A prefix of columns is the same whichever n is requested.
  const SampleMatrix wider = sample_matrix(ens, 15, 42);
  EXPECT_TRUE(wider.data.leftCols(9) == s.data);
}

TEST(SampleMatrix, InvalidDimensionsThrow) {
  EXPECT_THROW(sample_matrix({Family::GaussianIID, 0}, 5, 1), ArgumentError);
  EXPECT_THROW(sample_matrix({Family::GaussianIID, 5}, 0, 1), ArgumentError);
}

TEST(SampleMatrix, FamilyNamesRoundTrip) {
  for (const char* name : {"gaussian", "rademacher", "sphere"}) EXPECT_EQ(family_name(parse_family(name)), name);
  EXPECT_THROW(parse_family("cauchy"), ArgumentError);
  EXPECT_TRUE(has_iid_entries(Family::RademacherIID));
  EXPECT_FALSE(has_iid_entries(Family::SphereUniform));
}

TEST(SampleMatrix, EntryVarianceConcentratesForIidFamilies) {
  const int p = 100;
  const int n = 1000;
  for (Family f : {Family::GaussianIID, Family::RademacherIID}) {
    int ok = 0;
    const int seeds = 40;
    for (int seed = 0; seed < seeds; ++seed) {
      const SampleMatrix s = sample_matrix({f, p}, n, 1000 + seed);
      const double mean = s.data.mean();
      const double var = (s.data.array() - mean).square().sum() / (static_cast<double>(n) * p - 1.0);
      const double bound = 5.0 / std::sqrt(static_cast<double>(n) * p) / p;
      if (std::abs(var - 1.0 / p) <= bound) ++ok;
    }
    EXPECT_GE(ok, static_cast<int>(std::ceil(0.95 * seeds))) << family_name(f);
  }
}

TEST(MomentDiagnostic, GaussianFourthMomentNearThree) {
  const MomentReport r = moment_diagnostic({Family::GaussianIID, 50}, 4, 2000, 3);
  EXPECT_NEAR(r.estimate, 3.0, 5.0 * r.std_error);
  EXPECT_GT(r.std_error, 0.0);
}

TEST(MomentDiagnostic, RademacherFourthMomentIsExactlyOne) {
  const MomentReport r = moment_diagnostic({Family::RademacherIID, 50}, 4, 200, 3);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_DOUBLE_EQ(r.std_error, 0.0);
}

TEST(MomentDiagnostic, GaussianSecondMomentNearOne) {
  const MomentReport r = moment_diagnostic({Family::GaussianIID, 50}, 2, 2000, 4);
  EXPECT_NEAR(r.estimate, 1.0, 5.0 * r.std_error);
}

TEST(MomentDiagnostic, RejectsBadArguments) {
  EXPECT_THROW(moment_diagnostic({Family::GaussianIID, 10}, 3, 200, 1), ArgumentError);
  EXPECT_THROW(moment_diagnostic({Family::GaussianIID, 10}, 0, 200, 1), ArgumentError);
  EXPECT_THROW(moment_diagnostic({Family::GaussianIID, 10}, 4, 99, 1), ArgumentError);
}

TEST(MomentDiagnostic, BoundedMomentsDoNotGrow) {
  const std::array<int, 3> dims{10, 100, 1000};
  for (Family f : {Family::GaussianIID, Family::RademacherIID, Family::SphereUniform}) {
    const MomentGrowth g = moment_growth(f, 4, dims, 300, 11);
    EXPECT_EQ(g.reports.size(), 3u);
    EXPECT_FALSE(g.grows) << family_name(f);
  }
}

TEST(Concentration, SphereHasNoNormDeviation) {
  const ConcentrationReport r = concentration_diagnostic(sample_matrix({Family::SphereUniform, 40}, 30, 5));
  EXPECT_LT(r.max_norm_dev, 1e-14);
  EXPECT_GT(r.max_inner, 0.0);
}

TEST(Concentration, SingleColumnThrows) {
  EXPECT_THROW(concentration_diagnostic(sample_matrix({Family::GaussianIID, 4}, 1, 5)), ArgumentError);
}

TEST(Concentration, GaussianNormDeviationSmallAtLargeP) {
  // |X|^2 ~ chi^2_p / p; at p = 1000 a deviation of 0.25 is about 5.6 sd.
  int ok = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const SampleMatrix s = sample_matrix({Family::GaussianIID, 1000}, 500, 500 + seed);
    if (concentration_diagnostic(s).max_norm_dev < 0.25) ++ok;
  }
  EXPECT_GE(ok, 99);
}

TEST(Concentration, NormDeviationShrinksWithP) {
  auto median_dev = [](int p) {
    std::vector<double> v;
    for (int seed = 0; seed < 50; ++seed) {
      v.push_back(concentration_diagnostic(sample_matrix({Family::GaussianIID, p}, 20, 77 + seed)).max_norm_dev);
    }
    std::nth_element(v.begin(), v.begin() + 25, v.end());
    return v[25];
  };
  EXPECT_GT(median_dev(200), median_dev(2000));
}
