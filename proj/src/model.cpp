#include "lisinfer/model.hpp"

#include <cmath>

#include "lisinfer/error.hpp"

namespace lisinfer {

namespace {

class LinearLinearization final : public Linearization {
 public:
  LinearLinearization(const Matrix& matrix, Vector output)
      : matrix_(matrix), output_(std::move(output)) {}

  const Vector& output() const override { return output_; }
  Matrix jac_apply(const Matrix& v) const override { return matrix_ * v; }
  Matrix jac_adjoint(const Matrix& w) const override { return matrix_.transpose() * w; }

 private:
  const Matrix& matrix_;
  Vector output_;
};

Matrix whitened_hessian(const Matrix& forward, const GaussianPrior& prior, const ObsNoise& noise) {
  const Matrix gl = forward * prior.factor().L.triangularView<Eigen::Lower>();
  Matrix m = gl.transpose() * noise.inverse_apply(gl);
  return 0.5 * (m + m.transpose());
}

}  // namespace

Vector ForwardModel::jac_apply(const Vector& x, const Vector& v) const {
  return linearize(x)->jac_apply(v);
}

Vector ForwardModel::jac_adjoint(const Vector& x, const Vector& w) const {
  return linearize(x)->jac_adjoint(w);
}

Matrix ForwardModel::jacobian(const Vector& x) const {
  const auto lin = linearize(x);
  const Index n = param_dim();
  const Index d = obs_dim();
  if (n <= d) return lin->jac_apply(Matrix::Identity(n, n));
  return lin->jac_adjoint(Matrix::Identity(d, d)).transpose();
}

LinearModel::LinearModel(Matrix matrix, Vector offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (offset_.size() == 0) offset_ = Vector::Zero(matrix_.rows());
  if (offset_.size() != matrix_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "LinearModel offset size");
  }
}

Vector LinearModel::apply(const Vector& x) const {
  if (x.size() != matrix_.cols()) throw Error(ErrorKind::DimensionMismatch, "LinearModel::apply");
  return matrix_ * x + offset_;
}

std::unique_ptr<Linearization> LinearModel::linearize(const Vector& x) const {
  return std::make_unique<LinearLinearization>(matrix_, apply(x));
}

ObsNoise ObsNoise::diagonal(Vector variances) {
  if (variances.size() > 0 && !(variances.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "noise variances must be positive");
  }
  ObsNoise n;
  n.variances_ = std::move(variances);
  return n;
}

ObsNoise ObsNoise::isotropic(Index d, double sigma) {
  return diagonal(Vector::Constant(d, sigma * sigma));
}

ObsNoise ObsNoise::full(const Matrix& cov) {
  ObsNoise n;
  n.variances_ = cov.diagonal();
  n.full_factor_ = sym_factor(cov);
  return n;
}

Matrix ObsNoise::covariance() const {
  if (full_factor_) return full_factor_->reconstruct();
  return variances_.asDiagonal();
}

Matrix ObsNoise::inverse_apply(const Matrix& w) const {
  if (w.rows() != dim()) throw Error(ErrorKind::DimensionMismatch, "ObsNoise::inverse_apply");
  if (full_factor_) return full_factor_->transpose_solve(full_factor_->whiten(w));
  return variances_.cwiseInverse().asDiagonal() * w;
}

Vector ObsNoise::whiten(const Vector& r) const {
  if (full_factor_) return full_factor_->whiten(r);
  return r.cwiseQuotient(variances_.cwiseSqrt());
}

void ForwardProblem::validate() const {
  if (!model || !prior) throw Error(ErrorKind::InvalidArgument, "ForwardProblem is incomplete");
  if (prior->dim() != model->param_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "prior and model parameter dimensions differ");
  }
  if (noise.dim() != model->obs_dim() || data.size() != model->obs_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "noise/data and model output dimensions differ");
  }
}

double misfit(const ForwardProblem& problem, const Vector& x) {
  const Vector r = problem.model->apply(x) - problem.data;
  return 0.5 * problem.noise.whiten(r).squaredNorm();
}

double log_posterior(const ForwardProblem& problem, const Vector& x) {
  return -misfit(problem, x) + problem.prior->log_density(x);
}

Vector misfit_gradient(const ForwardProblem& problem, const Linearization& lin) {
  const Vector r = lin.output() - problem.data;
  return lin.jac_adjoint(problem.noise.inverse_apply(r));
}

PosteriorPoint evaluate_posterior(const ForwardProblem& problem, const Vector& x) {
  const auto lin = problem.model->linearize(x);
  const Vector r = lin->output() - problem.data;
  PosteriorPoint p;
  p.log_lik = -0.5 * problem.noise.whiten(r).squaredNorm();
  p.log_post = p.log_lik + problem.prior->log_density(x);
  p.grad = -lin->jac_adjoint(problem.noise.inverse_apply(r)) -
           problem.prior->precision_apply(x - problem.prior->mean());
  return p;
}

Vector grad_log_posterior(const ForwardProblem& problem, const Vector& x) {
  return evaluate_posterior(problem, x).grad;
}

Matrix gn_hessian_apply(const ForwardProblem& problem, const Linearization& lin,
                        const Matrix& v) {
  return lin.jac_adjoint(problem.noise.inverse_apply(lin.jac_apply(v)));
}

Matrix gn_hessian_apply(const ForwardProblem& problem, const Vector& x, const Matrix& v) {
  return gn_hessian_apply(problem, *problem.model->linearize(x), v);
}

Matrix ppgnh_apply(const ForwardProblem& problem, const Linearization& lin, const Matrix& v) {
  const SymFactor& f = problem.prior->factor();
  return f.transpose_apply(gn_hessian_apply(problem, lin, f.color(v)));
}

Matrix ppgnh_apply(const ForwardProblem& problem, const Vector& x, const Matrix& v) {
  return ppgnh_apply(problem, *problem.model->linearize(x), v);
}

Matrix ppgnh_dense(const ForwardProblem& problem, const Vector& x) {
  return whitened_hessian(problem.model->jacobian(x), *problem.prior, problem.noise);
}

LinearGaussianSolution linear_gaussian_posterior(const Matrix& forward, const GaussianPrior& prior,
                                                 const ObsNoise& noise, const Vector& data) {
  if (forward.cols() != prior.dim() || forward.rows() != noise.dim() ||
      data.size() != noise.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "linear_gaussian_posterior");
  }
  const Index n = prior.dim();
  const SymFactor& f = prior.factor();
  Matrix m = whitened_hessian(forward, prior, noise);
  m.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite()) {
    throw Error(ErrorKind::SingularSystem, "posterior precision is not invertible");
  }
  // Gamma_pos = L (L^T H L + I)^{-1} L^T
  const Matrix inner = llt.solve(Matrix::Identity(n, n));
  LinearGaussianSolution sol;
  sol.cov = f.color(f.color(inner).transpose());
  sol.cov = 0.5 * (sol.cov + sol.cov.transpose());
  const Vector rhs = prior.precision_apply(prior.mean()) +
                     forward.transpose() * noise.inverse_apply(data);
  sol.mean = sol.cov * rhs;
  return sol;
}

OptimalProjector optimal_linear_projector(const Matrix& forward, const GaussianPrior& prior,
                                          const ObsNoise& noise, Index rank) {
  const Index n = prior.dim();
  if (rank < 0 || rank > n) throw Error(ErrorKind::InvalidArgument, "projector rank out of range");
  if (forward.cols() != n || forward.rows() != noise.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "optimal_linear_projector");
  }
  const Matrix m = whitened_hessian(forward, prior, noise);
  if (!m.allFinite()) throw Error(ErrorKind::SingularSystem, "non-finite Hessian");
  const TruncatedEig eig = truncated_eig_dense(m, 0.0, n);
  const Matrix vr = eig.vectors.leftCols(rank);
  OptimalProjector p;
  p.u = prior.factor().color(vr);
  p.w = prior.factor().transpose_solve(vr);
  p.eigvals = eig.values;
  return p;
}

Matrix optimal_posterior_cov(const GaussianPrior& prior, const OptimalProjector& proj) {
  const Index r = proj.u.cols();
  Vector shrink(r);
  for (Index i = 0; i < r; ++i) {
    const double lam = proj.eigvals(i);
    shrink(i) = -lam / (1.0 + lam);
  }
  Matrix cov = prior.cov() + proj.u * shrink.asDiagonal() * proj.u.transpose();
  return 0.5 * (cov + cov.transpose());
}

double forstner_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "forstner_distance");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(0.5 * (a + a.transpose()),
                                                       0.5 * (b + b.transpose()));
  if (ges.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "forstner_distance: pencil not definite");
  }
  const Vector& s = ges.eigenvalues();
  if (!(s.minCoeff() > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "forstner_distance");
  return std::sqrt(s.array().log().square().sum());
}

}  // namespace lisinfer
