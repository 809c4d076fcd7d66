#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "rkm/ensembles.hpp"
#include "rkm/envelope.hpp"

namespace rkm {

enum class KernelKind { InnerProduct, SquaredDistance };
enum class Diagonal { Keep, Zero };

KernelKind parse_kernel(std::string_view name);  // "inner" | "distance"
Diagonal parse_diagonal(std::string_view name);  // "keep" | "zero"
std::string_view kernel_name(KernelKind kind);
std::string_view diagonal_name(Diagonal diag);

struct KernelSpec {
  KernelKind kernel = KernelKind::InnerProduct;
  Diagonal diagonal = Diagonal::Keep;
  Envelope envelope = envelopes::identity();

  // "inner/keep/exp:a=1"
  std::string to_string() const;
};

struct Provenance {
  VectorEnsemble ensemble;
  int n = 0;
  std::uint64_t seed = 0;
};

// Symmetric n x n matrix A_ij = f(g(X_i, X_j), p); built from the upper
// triangle so A == A^T bit for bit.
struct KernelMatrix {
  Eigen::MatrixXd data;
  KernelSpec spec;
  Provenance provenance;

  int n() const { return static_cast<int>(data.rows()); }
};

// G_ij = X_i^T X_j.
Eigen::MatrixXd gram(const SampleMatrix& sample);

// D_ij = G_ii + G_jj - 2 G_ij, clamped at 0, with D_ii = 0.
Eigen::MatrixXd squared_distances(const SampleMatrix& sample);

// Throws EvaluationError naming (i, j, x) when the envelope is non-finite.
KernelMatrix build(const KernelSpec& spec, const SampleMatrix& sample);

// Identity shift and Gram scale of the linearized companion B = shift I + scale G.
struct LinearCoefficients {
  double shift = 0.0;
  double scale = 0.0;
  bool numeric = false;  // some value came from numerical differentiation
};

// inner/keep:     shift = f(1) - f(0) - f'(0),     scale = f'(0)
// inner/zero:     shift = -f(0) - f'(0),           scale = f'(0)
// distance/keep:  shift = f(0) - f(2) + 2 f'(2),   scale = -2 f'(2)
// distance/zero:  shift = -f(2) + 2 f'(2),         scale = -2 f'(2)
LinearCoefficients linear_coefficients(const KernelSpec& spec, int p);

KernelMatrix linearized(const KernelSpec& spec, const SampleMatrix& sample);

// B = (a f'(a) - f(a)) I + f'(a) K for a general kernel matrix K (taken as
// given, including its diagonal).
Eigen::MatrixXd transference_linearized(const Eigen::MatrixXd& kernel_values, const Envelope& f, double a, int p);

// Replaces entry (row, col) of the sample matrix by new_value and returns the
// kernel matrices before and after. Only row/column `col` can differ.
std::pair<KernelMatrix, KernelMatrix> single_entry_swap(const SampleMatrix& sample, int row, int col,
                                                        double new_value, const KernelSpec& spec);

}  // namespace rkm
