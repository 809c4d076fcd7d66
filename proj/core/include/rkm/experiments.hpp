#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rkm/ensembles.hpp"
#include "rkm/kernel_matrix.hpp"
#include "rkm/limit_solver.hpp"
#include "rkm/mp_theory.hpp"
#include "rkm/spectral.hpp"

namespace rkm {

enum class Target { AffineMP, FunctionalEquation, CrossEnsemble };

Target parse_target(std::string_view name);  // "affine-mp" | "functional-equation" | "cross-ensemble"
std::string_view target_name(Target target);

// Flat key = value configuration; every key has a default and every run
// writes the resolved values back out.
struct ExperimentConfig {
  Family ensemble = Family::GaussianIID;
  Family ensemble2 = Family::RademacherIID;  // cross-ensemble only
  KernelKind kernel = KernelKind::InnerProduct;
  Diagonal diagonal = Diagonal::Keep;
  std::string envelope = "identity";
  int n = 200;
  int p = 100;
  int trials = 1;
  std::uint64_t seed = 1;
  Target target = Target::AffineMP;
  std::vector<double> z_re{-1.0, 0.0, 1.0, 2.0, 3.0};
  double z_im = 1.0;
  double epsilon = 1e-3;
  int law_points = 4001;
  std::optional<double> a;   // functional-equation parameters; estimated when absent
  std::optional<double> nu;
  int expand_degree = 4;
  long long expand_samples = 1000000;
  long long max_work = 200000;  // cap on n * trials
  std::string out = "rkm-out";

  double gamma() const { return static_cast<double>(p) / n; }
  std::vector<Complex> z_grid() const;
  KernelSpec kernel_spec() const;
};

// Throws ArgumentError for unknown keys or malformed values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_config_text(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

// Text for --help: every key with its meaning.
std::string config_key_help();

struct TrialDistance {
  int trial = 0;
  double ks = 0.0;
  double w1 = 0.0;
  double stieltjes_sup = 0.0;
};

struct TrialError {
  int trial = 0;
  std::string ensemble;
  std::string what;
};

struct EnsembleRun {
  Family family = Family::GaussianIID;
  std::vector<SpectralSample> samples;
  std::vector<ConcentrationReport> concentration;
  std::vector<TrialDistance> distances;
  TrialDistance pooled_distance{-1};
  Esd pooled;
};

using PredictedLaw = std::variant<AffineMPLaw, LimitLaw>;

struct ExperimentResult {
  ExperimentConfig config;
  KernelSpec spec;
  PredictedLaw law;
  EnsembleRun primary;
  std::optional<EnsembleRun> secondary;  // cross-ensemble mode
  std::optional<double> cross_ks;
  std::vector<TrialError> errors;
  bool incomplete = false;
  double seconds_matrices = 0.0;
  double seconds_law = 0.0;

  LawView law_view() const;
};

// Sample matrix of the primary ensemble for one trial.
SampleMatrix trial_sample(const ExperimentConfig& config, int trial);

// Eigenvalues of the primary-ensemble matrices, one sample per trial, with
// the same sub-seeds run_universality uses.
std::vector<SpectralSample> run_simulation(const ExperimentConfig& config);

// Builds kernel matrices per trial, compares the pooled ESD with the
// configured target. A failing trial is recorded in `errors` and the run
// continues, flagged incomplete.
ExperimentResult run_universality(const ExperimentConfig& config);

// Writes esd.csv, law.csv, distances.csv, config.resolved, law.meta,
// report.svg (plus esd2.csv, distances2.csv, cross.csv in cross-ensemble
// mode) and timings.txt. All files except timings.txt are deterministic.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);

// Keep- and zero-diagonal matrices from the same samples, compared through
// m_keep(z + f(b)) vs m_zero(z) with b = E g(X, X) (1 for inner, 0 for distance).
struct DiagonalRemovalReport {
  double shift = 0.0;  // f(b)
  std::vector<double> sup_stieltjes_gap;  // per trial, over the z grid
  std::vector<double> max_eigen_gap;      // per trial, |lambda_keep - shift - lambda_zero|
};

DiagonalRemovalReport run_diagonal_removal(const ExperimentConfig& config);

struct L2PerturbationReport {
  double eps_sq = 0.0;  // p * E|f1(Y^T Y', p) - f2(Y^T Y', p)|^2
  double eps = 0.0;
  Complex z;
  std::vector<double> abs_dm;  // |m_A1(z) - m_A2(z)| per trial
  double mean_abs_dm = 0.0;
  double ratio = 0.0;  // mean_abs_dm / eps (0 when eps == 0)
};

L2PerturbationReport run_l2_perturbation(const ExperimentConfig& config, const Envelope& f1, const Envelope& f2,
                                         long long pair_samples = 200000, Complex z = {0.0, 1.0});

// Variance of m_A(z) across trials for each n, with p = round(gamma * n).
VarianceDecayReport run_variance_decay(const ExperimentConfig& config, std::span<const int> sizes, Complex z);

}  // namespace rkm
