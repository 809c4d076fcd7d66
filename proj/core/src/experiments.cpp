#include "rkm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rkm/errors.hpp"
#include "rkm/orthopoly.hpp"
#include "rkm/rng.hpp"
#include "rkm/svg_plot.hpp"

namespace rkm {

Target parse_target(std::string_view name) {
  if (name == "affine-mp") return Target::AffineMP;
  if (name == "functional-equation") return Target::FunctionalEquation;
  if (name == "cross-ensemble") return Target::CrossEnsemble;
  throw ArgumentError("unknown target '" + std::string(name) +
                      "' (expected affine-mp, functional-equation or cross-ensemble)");
}

std::string_view target_name(Target target) {
  switch (target) {
    case Target::AffineMP: return "affine-mp";
    case Target::FunctionalEquation: return "functional-equation";
    case Target::CrossEnsemble: return "cross-ensemble";
  }
  return "unknown";
}

std::vector<Complex> ExperimentConfig::z_grid() const {
  std::vector<Complex> z;
  for (double x : z_re) z.emplace_back(x, z_im);
  return z;
}

KernelSpec ExperimentConfig::kernel_spec() const { return {kernel, diagonal, make_envelope(envelope)}; }

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ArgumentError("config key '" + std::string(key) + "' expects a number, got '" + v + "'");
  return out;
}

long long to_integer(std::string_view key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ArgumentError("config key '" + std::string(key) + "' expects an integer, got '" + v + "'");
  return out;
}

int to_int(std::string_view key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ArgumentError("config key '" + std::string(key) + "' is out of range");
  }
  return static_cast<int>(x);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "ensemble") {
    c.ensemble = parse_family(value);
  } else if (key == "ensemble2") {
    c.ensemble2 = parse_family(value);
  } else if (key == "kernel") {
    c.kernel = parse_kernel(value);
  } else if (key == "diag") {
    c.diagonal = parse_diagonal(value);
  } else if (key == "envelope") {
    make_envelope(value);  // validates
    c.envelope = value;
  } else if (key == "n") {
    c.n = to_int(key, value);
  } else if (key == "p") {
    c.p = to_int(key, value);
  } else if (key == "trials") {
    c.trials = to_int(key, value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else if (key == "target") {
    c.target = parse_target(value);
  } else if (key == "z_re") {
    c.z_re.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) c.z_re.push_back(to_double(key, trim(item)));
  } else if (key == "z_im") {
    c.z_im = to_double(key, value);
  } else if (key == "epsilon") {
    c.epsilon = to_double(key, value);
  } else if (key == "law_points") {
    c.law_points = to_int(key, value);
  } else if (key == "a") {
    c.a = to_double(key, value);
  } else if (key == "nu") {
    c.nu = to_double(key, value);
  } else if (key == "expand_degree") {
    c.expand_degree = to_int(key, value);
  } else if (key == "expand_samples") {
    c.expand_samples = to_integer(key, value);
  } else if (key == "max_work") {
    c.max_work = to_integer(key, value);
  } else if (key == "out") {
    c.out = value;
  } else {
    throw ArgumentError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) + " is not 'key = value': " + line);
    }
    apply_setting(c, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "ensemble = " << family_name(c.ensemble) << '\n'
     << "ensemble2 = " << family_name(c.ensemble2) << '\n'
     << "kernel = " << kernel_name(c.kernel) << '\n'
     << "diag = " << diagonal_name(c.diagonal) << '\n'
     << "envelope = " << c.envelope << '\n'
     << "n = " << c.n << '\n'
     << "p = " << c.p << '\n'
     << "trials = " << c.trials << '\n'
     << "seed = " << c.seed << '\n'
     << "target = " << target_name(c.target) << '\n'
     << "z_re = ";
  for (std::size_t i = 0; i < c.z_re.size(); ++i) os << (i ? "," : "") << format_double(c.z_re[i]);
  os << '\n'
     << "z_im = " << format_double(c.z_im) << '\n'
     << "epsilon = " << format_double(c.epsilon) << '\n'
     << "law_points = " << c.law_points << '\n';
  if (c.a) os << "a = " << format_double(*c.a) << '\n';
  if (c.nu) os << "nu = " << format_double(*c.nu) << '\n';
  os << "expand_degree = " << c.expand_degree << '\n'
     << "expand_samples = " << c.expand_samples << '\n'
     << "max_work = " << c.max_work << '\n'
     << "out = " << c.out << '\n';
  return os.str();
}

void validate(const ExperimentConfig& c) {
  if (c.n < 2) throw ArgumentError("config: n must be >= 2");
  if (c.p < 1) throw ArgumentError("config: p must be >= 1");
  if (c.trials < 1) throw ArgumentError("config: trials must be >= 1");
  if (static_cast<long long>(c.n) * c.trials > c.max_work) {
    throw ArgumentError("config: n * trials = " + std::to_string(static_cast<long long>(c.n) * c.trials) +
                        " exceeds max_work = " + std::to_string(c.max_work));
  }
  if (!(c.z_im > 0.0)) throw ArgumentError("config: z_im must be > 0");
  if (c.z_re.empty()) throw ArgumentError("config: z_re must list at least one point");
  if (!(c.epsilon > 0.0)) throw ArgumentError("config: epsilon must be > 0");
  if (c.law_points < 3) throw ArgumentError("config: law_points must be >= 3");
  if (c.a.has_value() != c.nu.has_value()) throw ArgumentError("config: set both a and nu, or neither");
  if (c.target != Target::AffineMP) {
    if (c.kernel != KernelKind::InnerProduct || c.diagonal != Diagonal::Zero) {
      throw ArgumentError("config: the functional-equation law applies to kernel = inner, diag = zero");
    }
  }
  make_envelope(c.envelope);
}

std::string config_key_help() {
  return "Config keys (key = value, '#' starts a comment):\n"
         "  ensemble        gaussian | rademacher | sphere\n"
         "  ensemble2       second ensemble for target = cross-ensemble\n"
         "  kernel          inner | distance\n"
         "  diag            keep | zero\n"
         "  envelope        identity | exp:a=<a> | power:a=<a> | square | const:c=<c> | sign-scaled | nonsmooth-sin\n"
         "  n, p            matrix size and vector dimension (gamma = p / n)\n"
         "  trials          independent matrices, pooled\n"
         "  seed            64-bit master seed\n"
         "  target          affine-mp | functional-equation | cross-ensemble\n"
         "  z_re, z_im      Stieltjes comparison grid z = z_re[k] + i z_im\n"
         "  epsilon         inversion height for the functional-equation law\n"
         "  law_points      grid size for the functional-equation law\n"
         "  a, nu           functional-equation parameters (estimated from the envelope when absent)\n"
         "  expand_degree   orthogonal expansion degree used to estimate a, nu\n"
         "  expand_samples  Monte Carlo samples used to estimate a, nu\n"
         "  max_work        cap on n * trials\n"
         "  out             output directory\n";
}

LawView ExperimentResult::law_view() const {
  return std::visit([](const auto& l) { return l.view(); }, law);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t trial_stream(int which) { return streams::kTrials + static_cast<std::uint64_t>(which); }

std::pair<double, double> law_range(const PredictedLaw& law) {
  if (const auto* mp = std::get_if<AffineMPLaw>(&law)) {
    auto [lo, hi] = mp->support();
    if (mp->atom_mass > 0.0) {
      lo = std::min(lo, mp->atom_location);
      hi = std::max(hi, mp->atom_location);
    }
    return {lo, hi};
  }
  const auto& fe = std::get<LimitLaw>(law);
  return {fe.x.front(), fe.x.back()};
}

TrialDistance distances_for(int trial, const Esd& esd, const LawView& view, const PredictedLaw& law,
                            const std::vector<Complex>& z_grid) {
  auto [lo, hi] = law_range(law);
  lo = std::min(lo, esd.points().front()) - 0.5;
  hi = std::max(hi, esd.points().back()) + 0.5;
  return {trial, ks_distance(esd, view), wasserstein1(esd, view, lo, hi), stieltjes_sup_distance(esd, view, z_grid)};
}

EnsembleRun run_ensemble(const ExperimentConfig& c, const KernelSpec& spec, Family family, int which,
                         std::vector<TrialError>& errors) {
  EnsembleRun run;
  run.family = family;
  const VectorEnsemble ensemble{family, c.p};
  for (int t = 0; t < c.trials; ++t) {
    try {
      const SampleMatrix s = sample_matrix(ensemble, c.n, derive_seed(c.seed, trial_stream(which), t));
      run.concentration.push_back(concentration_diagnostic(s));
      run.samples.push_back(eigenvalues(build(spec, s)));
    } catch (const std::exception& e) {
      errors.push_back({t, std::string(family_name(family)), e.what()});
    }
  }
  run.pooled = Esd::pooled(run.samples);
  return run;
}

void score(EnsembleRun& run, const LawView& view, const PredictedLaw& law, const std::vector<Complex>& z_grid) {
  for (std::size_t t = 0; t < run.samples.size(); ++t) {
    run.distances.push_back(distances_for(static_cast<int>(t), Esd(run.samples[t]), view, law, z_grid));
  }
  if (run.pooled.size() > 0) run.pooled_distance = distances_for(-1, run.pooled, view, law, z_grid);
}

void write_esd(const std::filesystem::path& path, const EnsembleRun& run) {
  std::ofstream out(path);
  out << "trial,lambda\n" << std::setprecision(17);
  for (std::size_t t = 0; t < run.samples.size(); ++t) {
    for (double l : run.samples[t].eigenvalues) out << t << ',' << l << '\n';
  }
}

void write_distances(const std::filesystem::path& path, const EnsembleRun& run) {
  std::ofstream out(path);
  out << "trial,ks,w1,stieltjes_sup\n" << std::setprecision(17);
  for (const auto& d : run.distances) out << d.trial << ',' << d.ks << ',' << d.w1 << ',' << d.stieltjes_sup << '\n';
  if (run.pooled.size() > 0) {
    const auto& d = run.pooled_distance;
    out << "pooled," << d.ks << ',' << d.w1 << ',' << d.stieltjes_sup << '\n';
  }
}

Curve tabulate_density(const PredictedLaw& law, int points, Curve* cdf_out) {
  Curve density;
  Curve cdf;
  if (const auto* mp = std::get_if<AffineMPLaw>(&law)) {
    auto [lo, hi] = law_range(law);
    const double pad = 0.05 * std::max(1.0, hi - lo);
    lo -= pad;
    hi += pad;
    for (int i = 0; i < points; ++i) {
      const double x = lo + (hi - lo) * i / (points - 1);
      density.x.push_back(x);
      density.y.push_back(mp->density(x));
      cdf.x.push_back(x);
      cdf.y.push_back(mp->cdf(x));
    }
  } else {
    const auto& fe = std::get<LimitLaw>(law);
    density.x = fe.x;
    density.y = fe.density;
    cdf.x = fe.x;
    cdf.y = fe.cdf;
  }
  if (cdf_out) *cdf_out = std::move(cdf);
  return density;
}

}  // namespace

SampleMatrix trial_sample(const ExperimentConfig& c, int trial) {
  return sample_matrix({c.ensemble, c.p}, c.n, derive_seed(c.seed, trial_stream(0), trial));
}

std::vector<SpectralSample> run_simulation(const ExperimentConfig& c) {
  validate(c);
  const KernelSpec spec = c.kernel_spec();
  std::vector<SpectralSample> out;
  for (int t = 0; t < c.trials; ++t) out.push_back(eigenvalues(build(spec, trial_sample(c, t))));
  return out;
}

ExperimentResult run_universality(const ExperimentConfig& c) {
  validate(c);
  ExperimentResult r;
  r.config = c;
  r.spec = c.kernel_spec();

  const auto t_law = Clock::now();
  if (c.target == Target::AffineMP) {
    r.law = predicted_law(r.spec, c.gamma(), c.p);
  } else {
    LimitParams params;
    params.gamma = c.gamma();
    // The constant coefficient adds E f (11^T - I): a rank-one term and a
    // shift by -E f = -a_0 / sqrt(p).
    double mean_shift = 0.0;
    if (c.a) {
      params.a = *c.a;
      params.nu = *c.nu;
    } else {
      const AdmissibleParams ap = envelope_coeffs(r.spec.envelope, {c.ensemble, c.p}, c.expand_degree,
                                                  c.expand_samples, derive_seed(c.seed, streams::kXi, 7));
      params.a = ap.a;
      params.nu = ap.nu;
      mean_shift = -ap.coeffs[0] / std::sqrt(static_cast<double>(c.p));
    }
    GridOptions grid;
    grid.n_points = c.law_points;
    grid.epsilon = c.epsilon;
    r.law = shifted(solve_grid(params, grid), mean_shift);
  }
  r.seconds_law = seconds_since(t_law);

  const auto t_mat = Clock::now();
  r.primary = run_ensemble(c, r.spec, c.ensemble, 0, r.errors);
  if (c.target == Target::CrossEnsemble) r.secondary = run_ensemble(c, r.spec, c.ensemble2, 1, r.errors);
  r.seconds_matrices = seconds_since(t_mat);

  const LawView view = r.law_view();
  const auto z_grid = c.z_grid();
  score(r.primary, view, r.law, z_grid);
  if (r.secondary) {
    score(*r.secondary, view, r.law, z_grid);
    if (r.primary.pooled.size() > 0 && r.secondary->pooled.size() > 0) {
      r.cross_ks = ks_distance(r.primary.pooled, r.secondary->pooled);
    }
  }
  r.incomplete = !r.errors.empty();
  return r;
}

void write_result(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.resolved");
    out << to_config_text(r.config);
  }
  write_esd(dir / "esd.csv", r.primary);
  write_distances(dir / "distances.csv", r.primary);

  Curve cdf;
  const Curve density = tabulate_density(r.law, 2001, &cdf);
  {
    std::ofstream out(dir / "law.csv");
    out << "x,density,cdf\n" << std::setprecision(17);
    for (std::size_t i = 0; i < density.x.size(); ++i) out << density.x[i] << ',' << density.y[i] << ',' << cdf.y[i] << '\n';
  }
  {
    std::ofstream out(dir / "law.meta");
    if (const auto* mp = std::get_if<AffineMPLaw>(&r.law)) {
      out << mp->to_key_value();
    } else {
      const auto& fe = std::get<LimitLaw>(r.law);
      out << std::setprecision(17) << "type = functional-equation\na = " << fe.params.a << "\nnu = " << fe.params.nu
          << "\ngamma = " << fe.params.gamma << "\nshift = " << fe.shift << "\nepsilon = " << fe.epsilon << "\natoms = " << fe.atoms.size() << '\n';
    }
  }
  if (r.secondary) {
    write_esd(dir / "esd2.csv", *r.secondary);
    write_distances(dir / "distances2.csv", *r.secondary);
    std::ofstream out(dir / "cross.csv");
    out << "statistic,value\n" << std::setprecision(17);
    if (r.cross_ks) out << "ks," << *r.cross_ks << '\n';
  }
  {
    std::ofstream out(dir / "errors.csv");
    out << "trial,ensemble,message\n";
    for (const auto& e : r.errors) out << e.trial << ',' << e.ensemble << ",\"" << e.what << "\"\n";
  }
  {
    std::ofstream out(dir / "report.svg");
    out << render_report_svg(r.spec.to_string() + " vs " + std::string(target_name(r.config.target)),
                             r.primary.pooled.points(), density, cdf);
  }
  {
    std::ofstream out(dir / "timings.txt");
    out << "law_seconds = " << r.seconds_law << "\nmatrix_seconds = " << r.seconds_matrices << '\n';
  }
}

DiagonalRemovalReport run_diagonal_removal(const ExperimentConfig& c) {
  validate(c);
  KernelSpec keep = c.kernel_spec();
  keep.diagonal = Diagonal::Keep;
  KernelSpec zero = keep;
  zero.diagonal = Diagonal::Zero;
  const double b = c.kernel == KernelKind::InnerProduct ? 1.0 : 0.0;

  DiagonalRemovalReport report;
  report.shift = keep.envelope(b, c.p);
  const auto z_grid = c.z_grid();
  for (int t = 0; t < c.trials; ++t) {
    const SampleMatrix s = sample_matrix({c.ensemble, c.p}, c.n, derive_seed(c.seed, trial_stream(0), t));
    const SpectralSample ek = eigenvalues(build(keep, s));
    const SpectralSample ez = eigenvalues(build(zero, s));
    double gap = 0.0;
    for (const Complex& z : z_grid) {
      gap = std::max(gap, std::abs(empirical_stieltjes(ek, z + report.shift) - empirical_stieltjes(ez, z)));
    }
    double eig_gap = 0.0;
    for (std::size_t i = 0; i < ek.eigenvalues.size(); ++i) {
      eig_gap = std::max(eig_gap, std::abs(ek.eigenvalues[i] - report.shift - ez.eigenvalues[i]));
    }
    report.sup_stieltjes_gap.push_back(gap);
    report.max_eigen_gap.push_back(eig_gap);
  }
  return report;
}

L2PerturbationReport run_l2_perturbation(const ExperimentConfig& c, const Envelope& f1, const Envelope& f2,
                                         long long pair_samples, Complex z) {
  validate(c);
  if (pair_samples < 1) throw ArgumentError("pair_samples must be >= 1");
  L2PerturbationReport report;
  report.z = z;

  const VectorEnsemble ensemble{c.ensemble, c.p};
  Rng rng = make_rng(c.seed, streams::kPairs, 0);
  const double root_p = std::sqrt(static_cast<double>(c.p));
  double acc = 0.0;
  for (long long s = 0; s < pair_samples; ++s) {
    const double x = sample_xi(ensemble, rng) / root_p;
    const double d = f1(x, c.p) - f2(x, c.p);
    acc += d * d;
  }
  report.eps_sq = c.p * acc / static_cast<double>(pair_samples);
  report.eps = std::sqrt(report.eps_sq);

  KernelSpec s1{c.kernel, c.diagonal, f1};
  KernelSpec s2{c.kernel, c.diagonal, f2};
  double total = 0.0;
  for (int t = 0; t < c.trials; ++t) {
    const SampleMatrix s = sample_matrix(ensemble, c.n, derive_seed(c.seed, trial_stream(0), t));
    const Complex m1 = empirical_stieltjes(eigenvalues(build(s1, s)), z);
    const Complex m2 = empirical_stieltjes(eigenvalues(build(s2, s)), z);
    report.abs_dm.push_back(std::abs(m1 - m2));
    total += report.abs_dm.back();
  }
  report.mean_abs_dm = total / c.trials;
  report.ratio = report.eps > 0.0 ? report.mean_abs_dm / report.eps : 0.0;
  return report;
}

VarianceDecayReport run_variance_decay(const ExperimentConfig& c, std::span<const int> sizes, Complex z) {
  validate(c);
  const KernelSpec spec = c.kernel_spec();
  const double gamma = c.gamma();
  auto generate = [&](int n, int trial) {
    const int p = std::max(1, static_cast<int>(std::lround(gamma * n)));
    const SampleMatrix s = sample_matrix({c.ensemble, p}, n,
                                         derive_seed(c.seed, trial_stream(0), static_cast<std::uint64_t>(n) * 100003u + trial));
    return eigenvalues(build(spec, s));
  };
  return stieltjes_variance_decay(generate, z, c.trials, sizes);
}

}  // namespace rkm
