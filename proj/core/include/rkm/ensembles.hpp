#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rkm {

// Population of the columns X_i. Every family is normalized so that
// E X = 0 and E ||X||^2 = 1; iid families have entry variance exactly 1/p.
// The enum is closed; new families need a sampler here and a moment rule in
// orthopoly.
enum class Family { GaussianIID, RademacherIID, SphereUniform };

// Accepts the CLI spellings "gaussian", "rademacher", "sphere".
Family parse_family(std::string_view name);
std::string_view family_name(Family family);
bool has_iid_entries(Family family);

struct VectorEnsemble {
  Family family = Family::GaussianIID;
  int p = 1;
};

// p x n matrix whose columns are X_1..X_n.
struct SampleMatrix {
  Eigen::MatrixXd data;
  VectorEnsemble ensemble;
  std::uint64_t seed = 0;

  int p() const { return static_cast<int>(data.rows()); }
  int n() const { return static_cast<int>(data.cols()); }
};

// Column j uses the sub-seed derive_seed(seed, columns, j), so any subset of
// columns can be regenerated independently.
Eigen::VectorXd sample_column(const VectorEnsemble& ensemble, std::uint64_t seed, int j);

SampleMatrix sample_matrix(const VectorEnsemble& ensemble, int n, std::uint64_t seed);

struct MomentReport {
  int K = 0;
  int p = 0;
  double estimate = 0.0;   // E|sqrt(p) * entry|^K
  double std_error = 0.0;  // CLT error bar
  long long count = 0;
};

MomentReport moment_diagnostic(const VectorEnsemble& ensemble, int K, int trials, std::uint64_t seed);

struct MomentGrowth {
  std::vector<MomentReport> reports;  // one per p, in input order
  bool grows = false;                 // significant rise (3 combined stderr) at every step
};

// Runs moment_diagnostic along a sequence of dimensions and flags a moment
// that keeps growing with p (a violation of the bounded-moment hypothesis).
MomentGrowth moment_growth(Family family, int K, std::span<const int> dims, int trials,
                           std::uint64_t seed);

struct ConcentrationReport {
  double max_norm_dev = 0.0;  // max_i | ||X_i||^2 - 1 |
  double max_inner = 0.0;     // max_{i != j} |X_i^T X_j|
};

ConcentrationReport concentration_diagnostic(const SampleMatrix& sample);

}  // namespace rkm
