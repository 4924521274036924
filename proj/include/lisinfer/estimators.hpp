#pragma once

#include <functional>
#include <optional>
#include <span>

#include "lisinfer/lis.hpp"

namespace lisinfer {

struct RbMoments {
  Vector mean;
  Vector variance;
  std::optional<Matrix> cov;
};

/// Full covariance is formed only up to this dimension.
inline constexpr Index kFullCovLimit = 2000;

/// phi_r mu_r + (I - Pi_r) mu_pr
Vector rb_mean(const GlobalLis& lis, const GaussianPrior& prior, const Vector& reduced_mean);

/// Gamma_pr + phi_r (reduced_cov - I) phi_r^T. The variance vector never
/// forms an n x n matrix; the full covariance is added when want_full is set
/// and n <= full_limit.
RbMoments rb_cov(const GlobalLis& lis, const GaussianPrior& prior, const Matrix& reduced_cov,
                 bool want_full = true, Index full_limit = kFullCovLimit);

/// rb_mean and rb_cov from the rows of a reduced chain.
RbMoments rb_moments(const GlobalLis& lis, const GaussianPrior& prior,
                     const Matrix& reduced_states, bool want_full = true,
                     Index full_limit = kFullCovLimit);

/// A function of the complement coordinates x_perp whose expectation under
/// N(cs_mean, I) is available in closed form or by quadrature.
class ComplementFunction {
 public:
  enum class Kind { Constant, Quadratic, Separable, Opaque };
  enum class Combine { Product, Sum };
  using Factor = std::function<double(Index coord, double value)>;

  static ComplementFunction constant(double c);
  /// c0 + a^T z + z^T q z; empty a or q mean zero.
  static ComplementFunction quadratic(double c0, Vector a, Matrix q);
  /// ||z||^2
  static ComplementFunction squared_norm();
  /// prod_i f(i, z_i) or sum_i f(i, z_i), integrated per coordinate with
  /// Gauss-Hermite quadrature.
  static ComplementFunction separable(Factor f, Combine combine, int order = 20);
  /// Evaluable but without a known expectation.
  static ComplementFunction opaque(std::function<double(const Vector&)> f);

  Kind kind() const { return kind_; }
  double operator()(const Vector& z) const;
  /// Expectation under N(cs_mean, I). Throws NonDecomposable for opaque functions.
  double expectation(const Vector& cs_mean) const;

 private:
  Kind kind_ = Kind::Constant;
  double c0_ = 0.0;
  Vector a_;
  Matrix q_;
  bool identity_q_ = false;
  Factor factor_;
  Combine combine_ = Combine::Product;
  int order_ = 20;
  std::function<double(const Vector&)> opaque_;
};

enum class RbMode { Product, Sum };

/// Gauss-Hermite nodes and weights for N(0, 1) (weights sum to one).
std::pair<Vector, Vector> gauss_hermite(int order);

/// (1/N) sum_k E[h | x_r^(k)] with h = h_r * h_perp (Product) or
/// h_r + h_perp (Sum).
double rb_expectation(const GlobalLis& lis, const GaussianPrior& prior,
                      const Matrix& reduced_states,
                      const std::function<double(const Vector&)>& h_r,
                      const ComplementFunction& h_perp, RbMode mode);

/// (1/N) sum_k h(x^(k)) over chain rows.
double standard_mc(const Matrix& states, const std::function<double(const Vector&)>& h);

Vector sample_mean(const Matrix& states);
/// Unbiased sample covariance of chain rows.
Matrix sample_cov(const Matrix& states);

/// sqrt(var * IAT / N); the IAT accounts for chain correlation.
double series_standard_error(std::span<const double> series);

}  // namespace lisinfer
