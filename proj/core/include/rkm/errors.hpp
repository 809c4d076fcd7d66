#pragma once

#include <stdexcept>
#include <string>

namespace rkm {

// Invalid dimensions, malformed configuration, out-of-range indices.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A required quantity (derivative, exact moments, ...) is not available for
// the given input.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Envelope produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hankel moment matrix is (numerically) singular.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Fixed-point / Newton solve of the limiting equation failed.
class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rkm
