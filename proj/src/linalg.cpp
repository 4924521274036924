#include "lisinfer/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "lisinfer/error.hpp"

namespace lisinfer {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kReconstructionTol = 1e-10;

void require_symmetric(const Matrix& mat, const char* where) {
  if (mat.rows() != mat.cols()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": matrix is not square");
  }
  if (relative_asymmetry(mat) > kSymmetryTol) {
    throw Error(ErrorKind::NotSymmetric, std::string(where) + ": asymmetry exceeds tolerance");
  }
}

Matrix orthonormal_range(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

// Eigenpairs of a small symmetric matrix, descending, filtered and capped.
TruncatedEig select_descending(const Eigen::SelfAdjointEigenSolver<Matrix>& es,
                               double threshold, Index max_rank) {
  const Vector& vals = es.eigenvalues();
  const Index n = vals.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  // Eigen returns ascending values; walk from the top.
  std::iota(order.begin(), order.end(), Index{0});
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return vals(a) > vals(b); });

  Index keep = 0;
  while (keep < n && keep < max_rank && vals(order[keep]) >= threshold) ++keep;

  TruncatedEig out;
  out.values.resize(keep);
  out.vectors.resize(es.eigenvectors().rows(), keep);
  for (Index i = 0; i < keep; ++i) {
    out.values(i) = std::max(vals(order[i]), 0.0);
    out.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  canonicalize_signs(out.vectors);
  return out;
}

}  // namespace

Matrix SymFactor::color(const Matrix& v) const {
  return L.triangularView<Eigen::Lower>() * v;
}

Matrix SymFactor::whiten(const Matrix& v) const {
  return L.triangularView<Eigen::Lower>().solve(v);
}

Matrix SymFactor::transpose_apply(const Matrix& v) const {
  return L.triangularView<Eigen::Lower>().transpose() * v;
}

Matrix SymFactor::transpose_solve(const Matrix& v) const {
  return L.triangularView<Eigen::Lower>().transpose().solve(v);
}

Matrix SymFactor::reconstruct() const {
  return L.triangularView<Eigen::Lower>() * L.transpose();
}

double relative_asymmetry(const Matrix& mat) {
  const double scale = mat.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (mat - mat.transpose()).cwiseAbs().maxCoeff() / scale;
}

SymFactor sym_factor(const Matrix& cov) {
  require_symmetric(cov, "sym_factor");
  const Index n = cov.rows();
  if (n == 0) return SymFactor{Matrix(0, 0), 0.0};

  const Matrix sym = 0.5 * (cov + cov.transpose());
  const double mean_diag = sym.trace() / static_cast<double>(n);
  const double norm = sym.norm();
  constexpr std::array<double, 4> deltas{0.0, 1e-12, 1e-10, 1e-8};

  for (double delta : deltas) {
    const double shift = delta * mean_diag;
    Matrix shifted = sym;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    SymFactor f{llt.matrixL(), shift};
    const double rel = (f.reconstruct() - shifted).norm() / std::max(shifted.norm(), norm);
    if (rel <= kReconstructionTol && f.L.diagonal().minCoeff() > 0.0) return f;
  }
  throw Error(ErrorKind::NotPositiveDefinite,
              "sym_factor: Cholesky failed after jitter escalation");
}

void canonicalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double cutoff = 1e-10 * col.cwiseAbs().maxCoeff();
    for (Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cutoff) {
        if (col(i) < 0.0) col *= -1.0;
        break;
      }
    }
  }
}

void modified_gram_schmidt(Matrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    for (Index i = 0; i < j; ++i) {
      basis.col(j) -= basis.col(i).dot(basis.col(j)) * basis.col(i);
    }
    const double nrm = basis.col(j).norm();
    if (nrm > 0.0) basis.col(j) /= nrm;
  }
}

TruncatedEig truncated_eig_dense(const Matrix& mat, double threshold, Index max_rank) {
  require_symmetric(mat, "truncated_eig_dense");
  if (threshold < 0.0) throw Error(ErrorKind::InvalidArgument, "threshold must be >= 0");
  if (mat.rows() == 0) return TruncatedEig{Vector(0), Matrix(0, 0)};
  const Matrix sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  return select_descending(es, threshold, std::max<Index>(0, max_rank));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

void probe_linearity(const BlockAction& apply, Index n, std::uint64_t seed) {
  const Matrix uv = gaussian_matrix(n, 2, seed ^ 0x5bd1e995ULL);
  const double a = 0.7, b = -1.3;
  Matrix block(n, 3);
  block.col(0) = uv.col(0);
  block.col(1) = uv.col(1);
  block.col(2) = a * uv.col(0) + b * uv.col(1);
  const Matrix out = apply(block);
  const Vector combo = a * out.col(0) + b * out.col(1);
  const double scale = std::abs(a) * out.col(0).norm() + std::abs(b) * out.col(1).norm();
  if ((out.col(2) - combo).norm() > 1e-8 * scale + 1e-300) {
    throw Error(ErrorKind::ActionNotLinear, "operator action failed the linearity probe");
  }
}

TruncatedEig truncated_eig_matfree(const BlockAction& apply, Index n, double threshold,
                                   Index max_rank, std::uint64_t seed,
                                   const MatFreeOptions& options) {
  if (threshold < 0.0) throw Error(ErrorKind::InvalidArgument, "threshold must be >= 0");
  max_rank = std::clamp<Index>(max_rank, 0, n);
  if (n == 0 || max_rank == 0) return TruncatedEig{Vector(0), Matrix(n, 0)};
  if (options.check_linearity) probe_linearity(apply, n, seed);

  const Index sketch = std::min(n, max_rank + std::max<Index>(options.oversample, 0));
  if (sketch >= n) {
    // The sketch would span everything; assemble the operator instead.
    Matrix full = apply(Matrix::Identity(n, n));
    full = 0.5 * (full + full.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(full);
    return select_descending(es, threshold, max_rank);
  }

  Matrix q = orthonormal_range(apply(gaussian_matrix(n, sketch, seed)));
  for (int it = 0; it < options.power_iterations; ++it) q = orthonormal_range(apply(q));

  for (int extra = 0;; ++extra) {
    const Matrix aq = apply(q);
    Matrix small = q.transpose() * aq;
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(small);
    TruncatedEig ritz = select_descending(es, threshold, max_rank);

    // Residuals of the retained Ritz pairs: A v - theta v with A v = (A Q) w.
    double worst = 0.0;
    if (ritz.size() > 0) {
      const Matrix w = ritz.vectors;
      const Matrix av = aq * w;
      const Matrix v = q * w;
      for (Index i = 0; i < ritz.size(); ++i) {
        worst = std::max(worst, (av.col(i) - ritz.values(i) * v.col(i)).norm());
      }
      ritz.vectors = v;
      canonicalize_signs(ritz.vectors);
    }
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (worst <= options.residual_tol * scale || extra >= options.max_extra_iterations) {
      return ritz;
    }
    q = orthonormal_range(aq);
  }
}

Vector principal_cosines(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 || b.cols() == 0) return Vector(0);
  Eigen::JacobiSVD<Matrix> svd(a.transpose() * b);
  return svd.singularValues().cwiseMin(1.0);
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "principal angles");
  if (a.cols() != b.cols()) return std::numbers::pi / 2.0;
  if (a.cols() == 0) return 0.0;
  const Matrix qa = orthonormal_range(a);
  const Matrix qb = orthonormal_range(b);
  // sin of the largest angle is the 2-norm of the part of qb outside span(qa).
  const Matrix resid = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Matrix> svd(resid);
  const double s = std::min(1.0, svd.singularValues()(0));
  return std::asin(s);
}

}  // namespace lisinfer
