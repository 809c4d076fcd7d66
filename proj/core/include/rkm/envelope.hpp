#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rkm {

// Closed-form values of an envelope at the points the linearization
// theorems use.
struct AnalyticValues {
  double f0 = 0.0;  // f(0)
  double d0 = 0.0;  // f'(0)
  double f1 = 0.0;  // f(1)
  double f2 = 0.0;  // f(2)
  double d2 = 0.0;  // f'(2)
};

// Scalar function f(x, p) applied entrywise to the kernel values.
struct Envelope {
  std::string name;
  std::function<double(double, int)> eval;
  std::optional<AnalyticValues> analytic;
  bool p_dependent = false;

  double operator()(double x, int p) const { return eval(x, p); }
};

namespace envelopes {
Envelope identity();
Envelope exponential(double a);  // exp(a x)
Envelope power(double a);        // (1 + x)^a, extended by 0 for x <= -1
Envelope square();               // x^2
Envelope constant(double c);
Envelope sign_scaled();          // p^{-1/2} sign(x), sign(0) = 0
Envelope nonsmooth_sin();        // x + x^2 sin(1/x), extended by f(0) = 0
}  // namespace envelopes

// Registry lookup from CLI strings such as "exp:a=1", "power:a=0.5",
// "const:c=2", "sign-scaled", "nonsmooth-sin", "identity", "square".
Envelope make_envelope(std::string_view spec);

struct DerivativeEstimate {
  double value = 0.0;
  double error = 0.0;  // |Richardson - coarse central difference|
};

// Central difference with h = max(1e-6, 1e-6 |x0|), Richardson-extrapolated
// once. Throws CapabilityError when the two estimates disagree or either is
// non-finite, which is what happens at a jump or kink.
DerivativeEstimate numeric_derivative(const Envelope& f, double x0, int p);

struct PointValue {
  double value = 0.0;
  bool numeric = false;  // true when no analytic value was available
};

// f'(x0), preferring the analytic record at x0 = 0 or 2.
PointValue envelope_derivative(const Envelope& f, double x0, int p);

}  // namespace rkm
