#pragma once

#include <cstdint>
#include <functional>

#include "lisinfer/types.hpp"

namespace lisinfer {

/// Symmetric factor of an SPD matrix, cov = L * L^T (L lower-triangular).
struct SymFactor {
  Matrix L;
  /// Diagonal shift that was added before the factorization succeeded.
  double jitter = 0.0;

  Index dim() const { return L.rows(); }

  /// L * v
  Matrix color(const Matrix& v) const;
  /// L^{-1} * v
  Matrix whiten(const Matrix& v) const;
  /// L^T * v
  Matrix transpose_apply(const Matrix& v) const;
  /// L^{-T} * v
  Matrix transpose_solve(const Matrix& v) const;
  /// L * L^T
  Matrix reconstruct() const;
};

/// Cholesky factorization with jitter escalation. The shift is
/// delta * trace(cov) / n with delta in {0, 1e-12, 1e-10, 1e-8}.
SymFactor sym_factor(const Matrix& cov);

/// Eigenpairs of a symmetric PSD operator, values descending, vectors
/// orthonormal with the first nonzero component of each made positive.
struct TruncatedEig {
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

TruncatedEig truncated_eig_dense(const Matrix& mat, double threshold, Index max_rank);

/// Applies a symmetric linear operator to each column of a block.
using BlockAction = std::function<Matrix(const Matrix&)>;

struct MatFreeOptions {
  Index oversample = 10;
  /// Power iterations before the first Rayleigh-Ritz step.
  int power_iterations = 2;
  /// Additional subspace iterations allowed while retained Ritz pairs have
  /// residual above residual_tol * largest Ritz value.
  int max_extra_iterations = 40;
  double residual_tol = 1e-9;
#ifdef NDEBUG
  bool check_linearity = false;
#else
  bool check_linearity = true;
#endif
};

/// Randomized subspace iteration for the leading eigenpairs of a symmetric
/// PSD operator known only through its action. Deterministic given seed.
TruncatedEig truncated_eig_matfree(const BlockAction& apply, Index n, double threshold,
                                   Index max_rank, std::uint64_t seed,
                                   const MatFreeOptions& options = {});

/// Throws ActionNotLinear when A(a u + b v) != a A u + b A v for random u, v.
void probe_linearity(const BlockAction& apply, Index n, std::uint64_t seed);

/// Makes the first component with magnitude above a relative cutoff positive,
/// column by column.
void canonicalize_signs(Matrix& vectors);

/// Modified Gram-Schmidt in place. Columns are assumed linearly independent.
void modified_gram_schmidt(Matrix& basis);

/// Cosines of the principal angles between the column spaces of two
/// orthonormal bases, descending.
Vector principal_cosines(const Matrix& a, const Matrix& b);

/// Largest principal angle (radians) between two column spaces; bases need
/// not be orthonormal. Spaces of different dimension give pi/2.
double max_principal_angle(const Matrix& a, const Matrix& b);

/// Standard-normal matrix drawn from a 64-bit Mersenne twister.
Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

/// Independent stream seed from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Max |A - A^T| relative to max |A|.
double relative_asymmetry(const Matrix& mat);

}  // namespace lisinfer
