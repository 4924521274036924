#pragma once

#include <memory>
#include <optional>

#include "lisinfer/prior.hpp"

namespace lisinfer {

/// Forward model state at one parameter value. Holds whatever the model
/// needs (factorizations, solution fields) to apply J(x) and J(x)^T to
/// blocks of vectors; owns its own workspace.
class Linearization {
 public:
  virtual ~Linearization() = default;

  /// G(x)
  virtual const Vector& output() const = 0;
  /// J(x) V, column by column
  virtual Matrix jac_apply(const Matrix& v) const = 0;
  /// J(x)^T W, column by column
  virtual Matrix jac_adjoint(const Matrix& w) const = 0;
};

/// Parameter-to-observable map G: R^n -> R^d. Implementations must be safe
/// for concurrent const use.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual Index param_dim() const = 0;
  virtual Index obs_dim() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
  virtual std::unique_ptr<Linearization> linearize(const Vector& x) const = 0;

  Vector jac_apply(const Vector& x, const Vector& v) const;
  Vector jac_adjoint(const Vector& x, const Vector& w) const;
  /// Dense J(x), assembled with min(n, d) actions.
  Matrix jacobian(const Vector& x) const;
};

/// G(x) = matrix * x + offset.
class LinearModel final : public ForwardModel {
 public:
  explicit LinearModel(Matrix matrix, Vector offset = Vector());

  Index param_dim() const override { return matrix_.cols(); }
  Index obs_dim() const override { return matrix_.rows(); }
  Vector apply(const Vector& x) const override;
  std::unique_ptr<Linearization> linearize(const Vector& x) const override;

  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
  Vector offset_;
};

/// Gaussian observation noise; diagonal by default, full SPD on request.
class ObsNoise {
 public:
  ObsNoise() = default;
  static ObsNoise diagonal(Vector variances);
  static ObsNoise isotropic(Index d, double sigma);
  static ObsNoise full(const Matrix& cov);

  Index dim() const { return variances_.size(); }
  bool is_diagonal() const { return !full_factor_.has_value(); }
  /// Diagonal of the covariance.
  const Vector& variances() const { return variances_; }
  Matrix covariance() const;
  /// cov^{-1} W
  Matrix inverse_apply(const Matrix& w) const;
  /// cov^{-1/2} r (Cholesky factor for full covariances)
  Vector whiten(const Vector& r) const;

 private:
  Vector variances_;
  std::optional<SymFactor> full_factor_;
};

struct ForwardProblem {
  std::shared_ptr<const ForwardModel> model;
  std::shared_ptr<const GaussianPrior> prior;
  ObsNoise noise;
  Vector data;

  Index param_dim() const { return model->param_dim(); }
  Index obs_dim() const { return model->obs_dim(); }
  /// Throws DimensionMismatch if the parts do not fit together.
  void validate() const;
};

/// 1/2 ||Gamma_obs^{-1/2}(G(x) - y)||^2
double misfit(const ForwardProblem& problem, const Vector& x);
/// -misfit(x) - 1/2 ||L^{-1}(x - mu_pr)||^2, normalization constants dropped.
double log_posterior(const ForwardProblem& problem, const Vector& x);
Vector grad_log_posterior(const ForwardProblem& problem, const Vector& x);

struct PosteriorPoint {
  double log_post = 0.0;
  double log_lik = 0.0;  // -misfit
  Vector grad;           // gradient of log_post
};

/// Log-posterior, log-likelihood and gradient from a single linearization.
PosteriorPoint evaluate_posterior(const ForwardProblem& problem, const Vector& x);

/// Misfit gradient J^T Gamma_obs^{-1} (G(x) - y) from an existing linearization.
Vector misfit_gradient(const ForwardProblem& problem, const Linearization& lin);

/// J(x)^T Gamma_obs^{-1} J(x) V
Matrix gn_hessian_apply(const ForwardProblem& problem, const Vector& x, const Matrix& v);
Matrix gn_hessian_apply(const ForwardProblem& problem, const Linearization& lin,
                        const Matrix& v);
/// L^T H(x) L V
Matrix ppgnh_apply(const ForwardProblem& problem, const Vector& x, const Matrix& v);
Matrix ppgnh_apply(const ForwardProblem& problem, const Linearization& lin, const Matrix& v);

/// Dense L^T H(x) L, assembled from the dense Jacobian.
Matrix ppgnh_dense(const ForwardProblem& problem, const Vector& x);

struct LinearGaussianSolution {
  Vector mean;
  Matrix cov;
};

/// Exact posterior for G(x) = matrix * x.
LinearGaussianSolution linear_gaussian_posterior(const Matrix& forward, const GaussianPrior& prior,
                                                 const ObsNoise& noise, const Vector& data);

struct OptimalProjector {
  Matrix u;        // L V_r
  Matrix w;        // L^{-T} V_r
  Vector eigvals;  // all eigenvalues of L^T H L, descending

  Matrix projector() const { return u * w.transpose(); }
};

OptimalProjector optimal_linear_projector(const Matrix& forward, const GaussianPrior& prior,
                                          const ObsNoise& noise, Index rank);

/// Gamma_pr + U_r diag(-lambda_i / (1 + lambda_i)) U_r^T
Matrix optimal_posterior_cov(const GaussianPrior& prior, const OptimalProjector& proj);

/// Förstner metric between SPD matrices: sqrt(sum ln^2 sigma_i) over the
/// generalized eigenvalues of the pencil (a, b).
double forstner_distance(const Matrix& a, const Matrix& b);

}  // namespace lisinfer
