#include "rkm/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rkm/errors.hpp"

namespace rkm {
namespace envelopes {

Envelope identity() {
  return {"identity", [](double x, int) { return x; }, AnalyticValues{0.0, 1.0, 1.0, 2.0, 1.0}, false};
}

Envelope exponential(double a) {
  return {"exp:a=" + std::to_string(a), [a](double x, int) { return std::exp(a * x); },
          AnalyticValues{1.0, a, std::exp(a), std::exp(2.0 * a), a * std::exp(2.0 * a)}, false};
}

Envelope power(double a) {
  if (!(a > 0.0)) throw ArgumentError("power envelope requires a > 0");
  return {"power:a=" + std::to_string(a),
          [a](double x, int) { return x > -1.0 ? std::pow(1.0 + x, a) : 0.0; },
          AnalyticValues{1.0, a, std::pow(2.0, a), std::pow(3.0, a), a * std::pow(3.0, a - 1.0)}, false};
}

Envelope square() {
  return {"square", [](double x, int) { return x * x; }, AnalyticValues{0.0, 0.0, 1.0, 4.0, 4.0}, false};
}

Envelope constant(double c) {
  return {"const:c=" + std::to_string(c), [c](double, int) { return c; }, AnalyticValues{c, 0.0, c, c, 0.0},
          false};
}

Envelope sign_scaled() {
  return {"sign-scaled",
          [](double x, int p) {
            const double s = (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
            return s / std::sqrt(static_cast<double>(p));
          },
          std::nullopt, true};
}

Envelope nonsmooth_sin() {
  // f'(x) = 1 + 2x sin(1/x) - cos(1/x) away from 0; f'(0) = 1.
  const double f2 = 2.0 + 4.0 * std::sin(0.5);
  const double d2 = 1.0 + 4.0 * std::sin(0.5) - std::cos(0.5);
  return {"nonsmooth-sin", [](double x, int) { return x == 0.0 ? 0.0 : x + x * x * std::sin(1.0 / x); },
          AnalyticValues{0.0, 1.0, 1.0 + std::sin(1.0), f2, d2}, false};
}

}  // namespace envelopes

namespace {

std::map<std::string, double> parse_params(std::string_view text, std::string_view spec) {
  std::map<std::string, double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("malformed envelope parameter '" + std::string(item) + "' in '" + std::string(spec) + "'");
    }
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw ArgumentError("envelope parameter '" + key + "' is not a number in '" + std::string(spec) + "'");
    }
    out[key] = v;
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return out;
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

Envelope make_envelope(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const auto params =
      colon == std::string_view::npos ? std::map<std::string, double>{} : parse_params(spec.substr(colon + 1), spec);

  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : params) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        throw ArgumentError("envelope '" + std::string(head) + "' has no parameter '" + key + "'");
      }
    }
  };
  if (head == "exp" || head == "power") {
    allow({"a"});
  } else if (head == "const") {
    allow({"c"});
  } else {
    allow({});
  }

  Envelope env;
  if (head == "identity") {
    env = envelopes::identity();
  } else if (head == "exp") {
    env = envelopes::exponential(param_or(params, "a", 1.0));
  } else if (head == "power") {
    env = envelopes::power(param_or(params, "a", 0.5));
  } else if (head == "square") {
    env = envelopes::square();
  } else if (head == "const") {
    env = envelopes::constant(param_or(params, "c", 1.0));
  } else if (head == "sign-scaled") {
    env = envelopes::sign_scaled();
  } else if (head == "nonsmooth-sin") {
    env = envelopes::nonsmooth_sin();
  } else {
    throw ArgumentError("unknown envelope '" + std::string(spec) +
                        "' (expected identity, exp:a=, power:a=, square, const:c=, sign-scaled, nonsmooth-sin)");
  }
  env.name = std::string(spec);
  return env;
}

DerivativeEstimate numeric_derivative(const Envelope& f, double x0, int p) {
  const double h = std::max(1e-6, 1e-6 * std::abs(x0));
  const double coarse = (f(x0 + h, p) - f(x0 - h, p)) / (2.0 * h);
  const double fine = (f(x0 + h / 2, p) - f(x0 - h / 2, p)) / h;
  const double richardson = (4.0 * fine - coarse) / 3.0;
  const double err = std::abs(richardson - coarse);
  if (!std::isfinite(richardson) || !std::isfinite(coarse) || err > 1e-4 * (1.0 + std::abs(richardson))) {
    throw CapabilityError("numeric derivative of envelope '" + f.name + "' at x=" + std::to_string(x0) +
                          " did not converge (central " + std::to_string(coarse) + ", extrapolated " +
                          std::to_string(richardson) + ")");
  }
  return {richardson, err};
}

PointValue envelope_derivative(const Envelope& f, double x0, int p) {
  if (f.analytic) {
    if (x0 == 0.0) return {f.analytic->d0, false};
    if (x0 == 2.0) return {f.analytic->d2, false};
  }
  return {numeric_derivative(f, x0, p).value, true};
}

}  // namespace rkm
