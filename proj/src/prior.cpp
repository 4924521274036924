#include "lisinfer/prior.hpp"

#include <cmath>

#include "lisinfer/error.hpp"

namespace lisinfer {

namespace {

Eigen::Matrix2d checked_inverse(const Eigen::Matrix2d& tensor) {
  const bool symmetric = std::abs(tensor(0, 1) - tensor(1, 0)) <=
                         1e-12 * tensor.cwiseAbs().maxCoeff();
  if (!symmetric || tensor(0, 0) <= 0.0 || tensor.determinant() <= 0.0) {
    throw Error(ErrorKind::DegenerateTensor, "correlation tensor must be SPD");
  }
  return tensor.inverse();
}

void check_scales(double sigma, double corr_len) {
  if (!(corr_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "corr_len must be > 0");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be > 0");
}

double aniso_exp(const GridPoint& s, const GridPoint& t, double sigma, double corr_len,
                 const Eigen::Matrix2d& inv_tensor) {
  const GridPoint d = s - t;
  const double q = std::max(0.0, d.dot(inv_tensor * d));
  return sigma * sigma * std::exp(-std::sqrt(q) / corr_len);
}

}  // namespace

double kernel_aniso_exp(const GridPoint& s, const GridPoint& t, double sigma, double corr_len,
                        const Eigen::Matrix2d& tensor) {
  check_scales(sigma, corr_len);
  return aniso_exp(s, t, sigma, corr_len, checked_inverse(tensor));
}

double kernel_sq_exp(double s, double t, double sigma, double corr_len) {
  if (!(corr_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "corr_len must be > 0");
  const double d = s - t;
  return sigma * std::exp(-d * d / (2.0 * corr_len * corr_len));
}

Kernel make_aniso_exp_kernel(double sigma, double corr_len, const Eigen::Matrix2d& tensor) {
  check_scales(sigma, corr_len);
  const Eigen::Matrix2d inv = checked_inverse(tensor);
  return [=](const GridPoint& s, const GridPoint& t) {
    return aniso_exp(s, t, sigma, corr_len, inv);
  };
}

Kernel make_sq_exp_kernel(double sigma, double corr_len) {
  if (!(corr_len > 0.0)) throw Error(ErrorKind::InvalidArgument, "corr_len must be > 0");
  return [=](const GridPoint& s, const GridPoint& t) {
    return kernel_sq_exp(s.x(), t.x(), sigma, corr_len);
  };
}

GaussianPrior::GaussianPrior(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "prior mean and covariance sizes differ");
  }
  factor_ = sym_factor(cov_);
}

double GaussianPrior::log_density(const Vector& x) const {
  return -0.5 * whiten(x).squaredNorm();
}

Vector GaussianPrior::whiten(const Vector& x) const {
  if (x.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "whiten");
  return factor_.whiten(x - mean_);
}

Vector GaussianPrior::precision_apply(const Vector& v) const {
  return factor_.transpose_solve(factor_.whiten(v));
}

Matrix GaussianPrior::sample(std::uint64_t seed, Index count) const {
  return sample_from(gaussian_matrix(dim(), count, seed));
}

Matrix GaussianPrior::sample_from(const Matrix& xi) const {
  if (xi.rows() != dim()) throw Error(ErrorKind::DimensionMismatch, "sample_from");
  Matrix out = factor_.color(xi);
  out.colwise() += mean_;
  return out;
}

Matrix kernel_matrix(std::span<const GridPoint> grid, const Kernel& kernel) {
  const auto n = static_cast<Index>(grid.size());
  Matrix cov(n, n);
  for (Index i = 0; i < n; ++i) {
    cov(i, i) = kernel(grid[i], grid[i]);
    for (Index j = 0; j < i; ++j) {
      const double k = kernel(grid[i], grid[j]);
      cov(i, j) = k;
      cov(j, i) = k;
    }
  }
  return cov;
}

GaussianPrior build_prior(std::span<const GridPoint> grid, const Kernel& kernel,
                          const Vector& mean) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "build_prior: empty grid");
  if (mean.size() != static_cast<Index>(grid.size())) {
    throw Error(ErrorKind::DimensionMismatch, "build_prior: mean size differs from grid");
  }
  return GaussianPrior(mean, kernel_matrix(grid, kernel));
}

Matrix block_diagonal(std::span<const Matrix> blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Matrix out = Matrix::Zero(n, n);
  Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace lisinfer
