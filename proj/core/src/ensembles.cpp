#include "rkm/ensembles.hpp"

#include <cmath>
#include <random>

#include "rkm/errors.hpp"
#include "rkm/rng.hpp"

namespace rkm {

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::GaussianIID;
  if (name == "rademacher") return Family::RademacherIID;
  if (name == "sphere") return Family::SphereUniform;
  throw ArgumentError("unknown ensemble '" + std::string(name) +
                      "' (expected gaussian, rademacher or sphere)");
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::GaussianIID: return "gaussian";
    case Family::RademacherIID: return "rademacher";
    case Family::SphereUniform: return "sphere";
  }
  return "unknown";
}

bool has_iid_entries(Family family) { return family != Family::SphereUniform; }

Eigen::VectorXd sample_column(const VectorEnsemble& ensemble, std::uint64_t seed, int j) {
  if (ensemble.p < 1) throw ArgumentError("ensemble dimension p must be >= 1");
  const int p = ensemble.p;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  Rng rng = make_rng(seed, streams::kColumns, static_cast<std::uint64_t>(j));
  Eigen::VectorXd x(p);
  switch (ensemble.family) {
    case Family::GaussianIID: {
      std::normal_distribution<double> normal;
      for (int i = 0; i < p; ++i) x[i] = scale * normal(rng);
      break;
    }
    case Family::RademacherIID: {
      std::uint64_t bits = 0;
      for (int i = 0; i < p; ++i) {
        if (i % 64 == 0) bits = rng();
        x[i] = (bits & 1ULL) ? scale : -scale;
        bits >>= 1;
      }
      break;
    }
    case Family::SphereUniform: {
      std::normal_distribution<double> normal;
      double norm2 = 0.0;
      do {
        for (int i = 0; i < p; ++i) x[i] = normal(rng);
        norm2 = x.squaredNorm();
      } while (norm2 == 0.0);
      x /= std::sqrt(norm2);
      break;
    }
  }
  return x;
}

SampleMatrix sample_matrix(const VectorEnsemble& ensemble, int n, std::uint64_t seed) {
  if (ensemble.p < 1 || n < 1) {
    throw ArgumentError("sample_matrix requires p >= 1 and n >= 1 (got p=" +
                        std::to_string(ensemble.p) + ", n=" + std::to_string(n) + ")");
  }
  SampleMatrix s{Eigen::MatrixXd(ensemble.p, n), ensemble, seed};
  for (int j = 0; j < n; ++j) s.data.col(j) = sample_column(ensemble, seed, j);
  return s;
}

MomentReport moment_diagnostic(const VectorEnsemble& ensemble, int K, int trials, std::uint64_t seed) {
  if (K < 2 || K % 2 != 0) throw ArgumentError("moment order K must be an even integer >= 2");
  if (trials < 100) throw ArgumentError("moment_diagnostic needs trials >= 100");
  if (ensemble.p < 1) throw ArgumentError("ensemble dimension p must be >= 1");

  const double root_p = std::sqrt(static_cast<double>(ensemble.p));
  double sum = 0.0;
  double sum_sq = 0.0;
  long long count = 0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = sample_column(ensemble, derive_seed(seed, streams::kMoments, 0), t);
    for (double v : x) {
      const double m = std::pow(std::abs(root_p * v), K);
      sum += m;
      sum_sq += m * m;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
  return MomentReport{K, ensemble.p, mean, std::sqrt(var / static_cast<double>(count)), count};
}

MomentGrowth moment_growth(Family family, int K, std::span<const int> dims, int trials,
                           std::uint64_t seed) {
  MomentGrowth out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out.reports.push_back(moment_diagnostic({family, dims[i]}, K, trials, derive_seed(seed, 0, i)));
  }
  // A bounded moment may still rise towards its limit (the sphere's 3p/(p+2));
  // only a significant rise at every step counts as growth.
  out.grows = out.reports.size() >= 2;
  for (std::size_t i = 1; i < out.reports.size(); ++i) {
    const auto& prev = out.reports[i - 1];
    const auto& cur = out.reports[i];
    if (cur.estimate - prev.estimate <= 3.0 * std::hypot(prev.std_error, cur.std_error)) out.grows = false;
  }
  return out;
}

ConcentrationReport concentration_diagnostic(const SampleMatrix& sample) {
  if (sample.n() < 2) throw ArgumentError("concentration_diagnostic needs n >= 2 for max_inner");
  const Eigen::MatrixXd g = sample.data.transpose() * sample.data;
  ConcentrationReport r;
  for (int i = 0; i < sample.n(); ++i) {
    r.max_norm_dev = std::max(r.max_norm_dev, std::abs(g(i, i) - 1.0));
    for (int j = i + 1; j < sample.n(); ++j) r.max_inner = std::max(r.max_inner, std::abs(g(i, j)));
  }
  return r;
}

}  // namespace rkm
