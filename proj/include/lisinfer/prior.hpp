#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lisinfer/linalg.hpp"

namespace lisinfer {

using GridPoint = Eigen::Vector2d;
using Kernel = std::function<double(const GridPoint&, const GridPoint&)>;

/// sigma^2 * exp(-sqrt((s-t)^T tensor^{-1} (s-t)) / corr_len)
double kernel_aniso_exp(const GridPoint& s, const GridPoint& t, double sigma, double corr_len,
                        const Eigen::Matrix2d& tensor);

/// sigma * exp(-(s-t)^2 / (2 corr_len^2)). The prefactor is sigma, not sigma^2.
double kernel_sq_exp(double s, double t, double sigma, double corr_len);

/// Kernel object for the anisotropic exponential covariance. The tensor is
/// validated and inverted once.
Kernel make_aniso_exp_kernel(double sigma, double corr_len, const Eigen::Matrix2d& tensor);

/// Squared-exponential kernel over the first coordinate of the grid points.
Kernel make_sq_exp_kernel(double sigma, double corr_len);

class GaussianPrior {
 public:
  GaussianPrior() = default;
  GaussianPrior(Vector mean, Matrix cov);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const SymFactor& factor() const { return factor_; }

  /// -1/2 ||L^{-1}(x - mean)||^2, normalization dropped.
  double log_density(const Vector& x) const;
  /// L^{-1}(x - mean)
  Vector whiten(const Vector& x) const;
  /// cov^{-1} v
  Vector precision_apply(const Vector& v) const;

  /// mean + L xi with xi standard normal, one column per draw.
  Matrix sample(std::uint64_t seed, Index count) const;
  /// mean + L xi for caller-provided xi (columns).
  Matrix sample_from(const Matrix& xi) const;

 private:
  Vector mean_;
  Matrix cov_;
  SymFactor factor_;
};

/// cov(i, j) = kernel(grid[i], grid[j]), factored through sym_factor.
GaussianPrior build_prior(std::span<const GridPoint> grid, const Kernel& kernel,
                          const Vector& mean);

Matrix kernel_matrix(std::span<const GridPoint> grid, const Kernel& kernel);

Matrix block_diagonal(std::span<const Matrix> blocks);

/// Prior factorized over LIS and complement coordinates; both factors have
/// identity covariance.
struct FactoredPrior {
  Vector lis_mean;  // Xi_r^T mu_pr
  Vector cs_mean;   // Xi_perp^T mu_pr
};

struct GlobalLis;
FactoredPrior factor_prior(const GaussianPrior& prior, const GlobalLis& lis);

}  // namespace lisinfer
