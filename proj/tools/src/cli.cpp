#include "rkm_cli/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/SVD>

#include "rkm/errors.hpp"
#include "rkm/experiments.hpp"
#include "rkm/orthopoly.hpp"

namespace rkm {
namespace {

constexpr std::array kConfigKeys{"ensemble", "ensemble2", "kernel",         "diag",           "envelope",
                                 "n",        "p",         "trials",         "seed",           "target",
                                 "z_re",     "z_im",      "epsilon",        "law_points",     "a",
                                 "nu",       "expand_degree", "expand_samples", "max_work",   "out"};

struct ConfigOptions {
  std::string path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// --config plus one override flag per config key (both --z-re and --z_re).
void add_config_options(CLI::App* sub, ConfigOptions& opts, bool with_out) {
  sub->add_option("--config", opts.path, "key = value config file");
  for (const char* key : kConfigKeys) {
    const std::string k = key;
    if (k == "out" && !with_out) continue;
    std::string dashed = k;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + dashed;
    if (dashed != k) names += ",--" + k;
    sub->add_option_function<std::string>(
        names, [&opts, k](const std::string& v) { opts.overrides.emplace_back(k, v); }, "config override: " + k);
  }
  sub->footer(config_key_help());
}

ExperimentConfig resolve(const ConfigOptions& opts) {
  ExperimentConfig c = opts.path.empty() ? ExperimentConfig{} : load_config(opts.path);
  for (const auto& [k, v] : opts.overrides) apply_setting(c, k, v);
  return c;
}

std::ostream& open_or(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path);
  if (!file) throw ArgumentError("cannot open '" + path + "' for writing");
  return file;
}

int cmd_simulate(const ConfigOptions& opts, const std::string& out_path, std::ostream& out) {
  const ExperimentConfig c = resolve(opts);
  const auto samples = run_simulation(c);
  std::ofstream file;
  std::ostream& os = open_or(out_path, file, out);
  os << "trial,lambda\n" << std::setprecision(17);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    for (double l : samples[t].eigenvalues) os << t << ',' << l << '\n';
  }
  return kExitOk;
}

struct PredictOptions {
  std::string law = "affine";
  std::optional<double> gamma;
  std::optional<double> shift;
  std::optional<double> scale;
  std::string params_path;
  std::optional<int> points;
  std::string out;
};

// Continuous part tabulated at x = c - r cos(theta_i), theta_i = (i + 1/2) pi / N,
// which clusters nodes at the edges where the density is least smooth.
void write_affine_table(std::ostream& os, const AffineMPLaw& law, int points) {
  os << "x,density,cdf\n" << std::setprecision(17);
  if (law.degenerate) {
    os << law.atom_location << ",0," << law.cdf(law.atom_location) << '\n';
    return;
  }
  const auto [lo, hi] = law.support();
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  for (int i = 0; i < points; ++i) {
    const double theta = (i + 0.5) * std::numbers::pi / points;
    const double x = c - r * std::cos(theta);
    os << x << ',' << law.density(x) << ',' << law.cdf(x) << '\n';
  }
}

int cmd_predict(const ConfigOptions& opts, const PredictOptions& po, std::ostream& out) {
  const ExperimentConfig c = resolve(opts);
  const double gamma = po.gamma.value_or(c.gamma());
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("--gamma must be > 0");
  const int points = po.points.value_or(c.law_points);
  if (points < 3) throw ArgumentError("--points must be >= 3");

  if (po.law == "mp" || po.law == "affine") {
    AffineMPLaw law;
    if (po.law == "mp") {
      law = affine_mp_law(gamma, 0.0, 1.0);
    } else if (po.shift || po.scale) {
      law = affine_mp_law(gamma, po.shift.value_or(0.0), po.scale.value_or(1.0));
    } else {
      law = predicted_law(c.kernel_spec(), gamma, c.p);
    }
    std::ofstream file;
    write_affine_table(open_or(po.out, file, out), law, points);
    if (!po.out.empty()) std::ofstream(po.out + ".meta") << law.to_key_value();
    return kExitOk;
  }

  LimitParams params;
  if (!po.params_path.empty()) {
    std::ifstream in(po.params_path);
    if (!in) throw ArgumentError("cannot open parameter record '" + po.params_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    params = limit_params_from_key_value(ss.str(), gamma);
  } else if (c.a && c.nu) {
    params = {*c.a, *c.nu, gamma};
  } else {
    throw ArgumentError("--law fe needs --a and --nu or --params");
  }
  GridOptions grid;
  grid.n_points = points;
  grid.epsilon = c.epsilon;
  const LimitLaw law = solve_grid(params, grid);
  if (po.out.empty()) {
    out << "x,density,cdf\n" << std::setprecision(17);
    for (std::size_t i = 0; i < law.x.size(); ++i) out << law.x[i] << ',' << law.density[i] << ',' << law.cdf[i] << '\n';
  } else {
    write_law_csv(po.out, law);
  }
  return kExitOk;
}

int cmd_expand(const ConfigOptions& opts, const std::vector<int>& p_list, const std::string& out_path,
               std::ostream& out) {
  const ExperimentConfig c = resolve(opts);
  const Envelope f = make_envelope(c.envelope);
  const AdmissibleParams ap =
      envelope_coeffs(f, {c.ensemble, c.p}, c.expand_degree, c.expand_samples, derive_seed(c.seed, streams::kXi, 7));
  out << "# envelope " << c.envelope << ", ensemble " << family_name(c.ensemble) << ", p " << c.p << ", samples "
      << ap.samples << '\n';
  out << "k,coeff,std_error\n" << std::setprecision(10);
  for (std::size_t k = 0; k < ap.coeffs.size(); ++k) out << k << ',' << ap.coeffs[k] << ',' << ap.std_errors[k] << '\n';
  out << "a = " << ap.a << "\nnu = " << ap.nu << "\nnu_raw = " << ap.nu_raw << " +- " << ap.nu_std_error
      << "\ntail_mass = " << ap.tail_mass << '\n';
  if (ap.inconsistent) out << "warning: sample variance below the sum of squared coefficients\n";

  if (!p_list.empty()) {
    out << "p,a,nu,tail_mass\n";
    for (int p : p_list) {
      const AdmissibleParams q =
          envelope_coeffs(f, {c.ensemble, p}, c.expand_degree, c.expand_samples, derive_seed(c.seed, streams::kXi, 7));
      out << p << ',' << q.a << ',' << q.nu << ',' << q.tail_mass << '\n';
    }
  }
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    if (!file) throw ArgumentError("cannot open '" + out_path + "' for writing");
    file << to_key_value(ap);
  }
  return kExitOk;
}

int cmd_diagnose(const ConfigOptions& opts, int moment_trials, std::ostream& out) {
  const ExperimentConfig c = resolve(opts);
  validate(c);
  const VectorEnsemble ens{c.ensemble, c.p};
  out << "K,p,moment,std_error\n" << std::setprecision(8);
  for (int K : {2, 4, 6, 8}) {
    const MomentReport m = moment_diagnostic(ens, K, moment_trials, derive_seed(c.seed, streams::kMoments, K));
    out << K << ',' << m.p << ',' << m.estimate << ',' << m.std_error << '\n';
  }
  const std::array<int, 3> dims{c.p, 2 * c.p, 4 * c.p};
  const MomentGrowth g = moment_growth(c.ensemble, 4, dims, moment_trials, derive_seed(c.seed, streams::kMoments, 99));
  out << "fourth moment over p = " << dims[0] << ',' << dims[1] << ',' << dims[2] << ": "
      << (g.grows ? "growing" : "bounded") << '\n';
  const ConcentrationReport cr = concentration_diagnostic(trial_sample(c, 0));
  out << "max | |X_i|^2 - 1 | = " << cr.max_norm_dev << "\nmax_{i != j} |X_i^T X_j| = " << cr.max_inner << '\n';
  return kExitOk;
}

int cmd_swap_check(const ConfigOptions& opts, int row, int col, std::optional<double> value, std::ostream& out) {
  const ExperimentConfig c = resolve(opts);
  validate(c);
  const SampleMatrix s = trial_sample(c, 0);
  if (row < 0 || row >= c.p || col < 0 || col >= c.n) {
    throw ArgumentError("--row must be in [0, p) and --col in [0, n)");
  }
  const double v = value.value_or(-s.data(row, col));
  const auto [before, after] = single_entry_swap(s, row, col, v, c.kernel_spec());
  const Eigen::MatrixXd d = after.data - before.data;

  bool confined = true;
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = 0; j < d.cols(); ++j) {
      if (i != col && j != col && d(i, j) != 0.0) confined = false;
    }
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(d).singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > tol ? 1 : 0;

  out << std::setprecision(10) << "entry (" << row << ", " << col << "): " << s.data(row, col) << " -> " << v << '\n'
      << "difference rank = " << rank << "\nchanges confined to row/column " << col << ": "
      << (confined ? "yes" : "no") << '\n';
  return rank <= 2 && confined ? kExitOk : kExitNumerical;
}

int cmd_compare(const ConfigOptions& opts, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolve(opts);
  const ExperimentResult r = run_universality(c);
  write_result(r, c.out);
  out << std::setprecision(6) << "wrote " << c.out << '\n'
      << "pooled ks = " << r.primary.pooled_distance.ks << ", w1 = " << r.primary.pooled_distance.w1
      << ", stieltjes_sup = " << r.primary.pooled_distance.stieltjes_sup << '\n';
  if (r.secondary) {
    out << "second ensemble pooled ks = " << r.secondary->pooled_distance.ks << '\n';
    if (r.cross_ks) out << "cross-ensemble ks = " << *r.cross_ks << '\n';
  }
  for (const auto& e : r.errors) err << "trial " << e.trial << " (" << e.ensemble << ") failed: " << e.what << '\n';
  if (r.primary.samples.empty()) {
    err << "no trial completed\n";
    return kExitNumerical;
  }
  if (r.incomplete) err << "run incomplete: " << r.errors.size() << " trial(s) failed\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random kernel matrix spectra and their limiting laws", "rkm"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  ConfigOptions sim_opts;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "eigenvalues of the configured kernel matrices (trial,lambda)");
  add_config_options(simulate, sim_opts, false);
  simulate->add_option("--out", sim_out, "CSV path (stdout when absent)");

  ConfigOptions pred_opts;
  PredictOptions po;
  auto* predict = app.add_subcommand("predict", "tabulate a limiting law (x,density,cdf)");
  add_config_options(predict, pred_opts, false);
  predict->add_option("--law", po.law, "mp | affine | fe")->check(CLI::IsMember({"mp", "affine", "fe"}));
  predict->add_option("--gamma", po.gamma, "aspect ratio p/n (default from n, p)");
  predict->add_option("--shift", po.shift, "affine shift (default from the kernel spec)");
  predict->add_option("--scale", po.scale, "affine scale (default from the kernel spec)");
  predict->add_option("--params", po.params_path, "parameter record written by 'expand --out'");
  predict->add_option("--points", po.points, "grid size (default law_points)");
  predict->add_option("--out", po.out, "CSV path (stdout when absent)");

  ConfigOptions exp_opts;
  std::vector<int> p_list;
  std::string exp_out;
  auto* expand = app.add_subcommand("expand", "orthogonal expansion coefficients of the envelope");
  add_config_options(expand, exp_opts, false);
  expand->add_option("--p-list", p_list, "extra dimensions for a convergence table")->delimiter(',');
  expand->add_option("--out", exp_out, "write the parameter record here");

  ConfigOptions cmp_opts;
  auto* compare = app.add_subcommand("compare", "full run against the configured target; writes a result directory");
  add_config_options(compare, cmp_opts, true);

  ConfigOptions diag_opts;
  int moment_trials = 20000;
  auto* diagnose = app.add_subcommand("diagnose", "entry moments and concentration of the ensemble");
  add_config_options(diagnose, diag_opts, false);
  diagnose->add_option("--moment-trials", moment_trials, "vectors per moment estimate");

  ConfigOptions swap_opts;
  int row = 0;
  int col = 0;
  std::optional<double> value;
  auto* swap = app.add_subcommand("swap-check", "rank of the change caused by replacing one sample entry");
  add_config_options(swap, swap_opts, false);
  swap->add_option("--row", row, "coordinate index in [0, p)");
  swap->add_option("--col", col, "vector index in [0, n)");
  swap->add_option("--value", value, "replacement value (default: negated entry)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_opts, sim_out, out);
    if (predict->parsed()) return cmd_predict(pred_opts, po, out);
    if (expand->parsed()) return cmd_expand(exp_opts, p_list, exp_out, out);
    if (compare->parsed()) return cmd_compare(cmp_opts, out, err);
    if (diagnose->parsed()) return cmd_diagnose(diag_opts, moment_trials, out);
    if (swap->parsed()) return cmd_swap_check(swap_opts, row, col, value, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EvaluationError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitValidation;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace rkm
