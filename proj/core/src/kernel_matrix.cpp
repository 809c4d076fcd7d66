#include "rkm/kernel_matrix.hpp"

#include <cmath>
#include <sstream>

#include "rkm/errors.hpp"

namespace rkm {

KernelKind parse_kernel(std::string_view name) {
  if (name == "inner") return KernelKind::InnerProduct;
  if (name == "distance") return KernelKind::SquaredDistance;
  throw ArgumentError("unknown kernel '" + std::string(name) + "' (expected inner or distance)");
}

Diagonal parse_diagonal(std::string_view name) {
  if (name == "keep") return Diagonal::Keep;
  if (name == "zero") return Diagonal::Zero;
  throw ArgumentError("unknown diagonal convention '" + std::string(name) + "' (expected keep or zero)");
}

std::string_view kernel_name(KernelKind kind) {
  return kind == KernelKind::InnerProduct ? "inner" : "distance";
}

std::string_view diagonal_name(Diagonal diag) { return diag == Diagonal::Keep ? "keep" : "zero"; }

std::string KernelSpec::to_string() const {
  std::ostringstream os;
  os << kernel_name(kernel) << '/' << diagonal_name(diagonal) << '/' << envelope.name;
  return os.str();
}

Eigen::MatrixXd gram(const SampleMatrix& sample) {
  Eigen::MatrixXd g(sample.n(), sample.n());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(sample.data.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

Eigen::MatrixXd squared_distances(const SampleMatrix& sample) {
  const Eigen::MatrixXd g = gram(sample);
  const int n = sample.n();
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (int i = 0; i < j; ++i) {
      const double v = std::max(0.0, g(i, i) + g(j, j) - 2.0 * g(i, j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

Eigen::MatrixXd kernel_values(KernelKind kind, const SampleMatrix& sample) {
  return kind == KernelKind::InnerProduct ? gram(sample) : squared_distances(sample);
}

double checked_eval(const Envelope& f, double x, int p, int i, int j) {
  const double v = f(x, p);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "envelope '" << f.name << "' is non-finite at (i=" << i << ", j=" << j << ", x=" << x << ")";
    throw EvaluationError(os.str());
  }
  return v;
}

Eigen::MatrixXd apply_envelope(const KernelSpec& spec, const Eigen::MatrixXd& values, int p) {
  const int n = static_cast<int>(values.rows());
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double v = checked_eval(spec.envelope, values(i, j), p, i, j);
      a(i, j) = v;
      a(j, i) = v;
    }
    a(j, j) = spec.diagonal == Diagonal::Zero ? 0.0 : checked_eval(spec.envelope, values(j, j), p, j, j);
  }
  return a;
}

double value_at(const Envelope& f, double x, int p, double AnalyticValues::*field) {
  if (f.analytic) return (*f.analytic).*field;
  return f(x, p);
}

}  // namespace

KernelMatrix build(const KernelSpec& spec, const SampleMatrix& sample) {
  return {apply_envelope(spec, kernel_values(spec.kernel, sample), sample.p()), spec,
          {sample.ensemble, sample.n(), sample.seed}};
}

LinearCoefficients linear_coefficients(const KernelSpec& spec, int p) {
  const Envelope& f = spec.envelope;
  LinearCoefficients c;
  if (spec.kernel == KernelKind::InnerProduct) {
    const PointValue d0 = envelope_derivative(f, 0.0, p);
    const double f0 = value_at(f, 0.0, p, &AnalyticValues::f0);
    c.scale = d0.value;
    c.numeric = d0.numeric;
    if (spec.diagonal == Diagonal::Keep) {
      c.shift = value_at(f, 1.0, p, &AnalyticValues::f1) - f0 - d0.value;
    } else {
      c.shift = -f0 - d0.value;
    }
  } else {
    const PointValue d2 = envelope_derivative(f, 2.0, p);
    const double f2 = value_at(f, 2.0, p, &AnalyticValues::f2);
    c.scale = -2.0 * d2.value;
    c.numeric = d2.numeric;
    c.shift = -f2 + 2.0 * d2.value;
    if (spec.diagonal == Diagonal::Keep) c.shift += value_at(f, 0.0, p, &AnalyticValues::f0);
  }
  return c;
}

KernelMatrix linearized(const KernelSpec& spec, const SampleMatrix& sample) {
  const LinearCoefficients c = linear_coefficients(spec, sample.p());
  Eigen::MatrixXd b = c.scale * gram(sample);
  b.diagonal().array() += c.shift;
  return {std::move(b), spec, {sample.ensemble, sample.n(), sample.seed}};
}

Eigen::MatrixXd transference_linearized(const Eigen::MatrixXd& kernel_values, const Envelope& f, double a, int p) {
  if (kernel_values.rows() != kernel_values.cols()) throw ArgumentError("kernel matrix must be square");
  const double slope = envelope_derivative(f, a, p).value;
  const double fa = f(a, p);
  Eigen::MatrixXd b = slope * kernel_values;
  b.diagonal().array() += a * slope - fa;
  return b;
}

std::pair<KernelMatrix, KernelMatrix> single_entry_swap(const SampleMatrix& sample, int row, int col,
                                                        double new_value, const KernelSpec& spec) {
  if (row < 0 || row >= sample.p() || col < 0 || col >= sample.n()) {
    throw ArgumentError("swap index (" + std::to_string(row) + ", " + std::to_string(col) +
                        ") out of range for a " + std::to_string(sample.p()) + "x" + std::to_string(sample.n()) +
                        " sample");
  }
  SampleMatrix swapped = sample;
  swapped.data(row, col) = new_value;
  return {build(spec, sample), build(spec, swapped)};
}

}  // namespace rkm
