#include "lisinfer/estimators.hpp"

#include <cmath>

#include "lisinfer/error.hpp"

namespace lisinfer {

Vector rb_mean(const GlobalLis& lis, const GaussianPrior& prior, const Vector& reduced_mean) {
  if (reduced_mean.size() != lis.rank() || lis.dim() != prior.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "rb_mean");
  }
  const Vector& mu = prior.mean();
  return lis.phi * reduced_mean + mu - lis.phi * (lis.xi.transpose() * mu);
}

RbMoments rb_cov(const GlobalLis& lis, const GaussianPrior& prior, const Matrix& reduced_cov,
                 bool want_full, Index full_limit) {
  const Index r = lis.rank();
  if (reduced_cov.rows() != r || reduced_cov.cols() != r || lis.dim() != prior.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "rb_cov");
  }
  Matrix delta = 0.5 * (reduced_cov + reduced_cov.transpose());
  delta.diagonal().array() -= 1.0;
  const Matrix pd = lis.phi * delta;

  RbMoments m;
  m.variance = prior.cov().diagonal() + pd.cwiseProduct(lis.phi).rowwise().sum();
  if (want_full && lis.dim() <= full_limit) {
    Matrix cov = prior.cov() + pd * lis.phi.transpose();
    m.cov = 0.5 * (cov + cov.transpose());
  }
  return m;
}

RbMoments rb_moments(const GlobalLis& lis, const GaussianPrior& prior,
                     const Matrix& reduced_states, bool want_full, Index full_limit) {
  if (reduced_states.cols() != lis.rank()) {
    throw Error(ErrorKind::DimensionMismatch, "rb_moments: chain dimension");
  }
  if (reduced_states.rows() == 0) throw Error(ErrorKind::EmptyChain, "rb_moments");
  const Matrix cov = reduced_states.rows() > 1 ? sample_cov(reduced_states)
                                               : Matrix(Matrix::Zero(lis.rank(), lis.rank()));
  RbMoments m = rb_cov(lis, prior, cov, want_full, full_limit);
  m.mean = rb_mean(lis, prior, sample_mean(reduced_states));
  return m;
}

ComplementFunction ComplementFunction::constant(double c) {
  ComplementFunction f;
  f.kind_ = Kind::Constant;
  f.c0_ = c;
  return f;
}

ComplementFunction ComplementFunction::quadratic(double c0, Vector a, Matrix q) {
  if (q.size() > 0 && q.rows() != q.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "quadratic form must be square");
  }
  ComplementFunction f;
  f.kind_ = Kind::Quadratic;
  f.c0_ = c0;
  f.a_ = std::move(a);
  f.q_ = std::move(q);
  return f;
}

ComplementFunction ComplementFunction::squared_norm() {
  ComplementFunction f;
  f.kind_ = Kind::Quadratic;
  f.identity_q_ = true;
  return f;
}

ComplementFunction ComplementFunction::separable(Factor factor, Combine combine, int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  ComplementFunction f;
  f.kind_ = Kind::Separable;
  f.factor_ = std::move(factor);
  f.combine_ = combine;
  f.order_ = order;
  return f;
}

ComplementFunction ComplementFunction::opaque(std::function<double(const Vector&)> fn) {
  ComplementFunction f;
  f.kind_ = Kind::Opaque;
  f.opaque_ = std::move(fn);
  return f;
}

double ComplementFunction::operator()(const Vector& z) const {
  switch (kind_) {
    case Kind::Constant:
      return c0_;
    case Kind::Quadratic: {
      double v = c0_;
      if (a_.size() > 0) v += a_.dot(z);
      if (identity_q_) v += z.squaredNorm();
      if (q_.size() > 0) v += z.dot(q_ * z);
      return v;
    }
    case Kind::Separable: {
      double v = combine_ == Combine::Product ? 1.0 : 0.0;
      for (Index i = 0; i < z.size(); ++i) {
        const double fi = factor_(i, z(i));
        v = combine_ == Combine::Product ? v * fi : v + fi;
      }
      return v;
    }
    case Kind::Opaque:
      return opaque_(z);
  }
  return 0.0;
}

double ComplementFunction::expectation(const Vector& m) const {
  switch (kind_) {
    case Kind::Constant:
      return c0_;
    case Kind::Quadratic: {
      // E[c0 + a^T z + z^T Q z] = c0 + a^T m + tr(Q) + m^T Q m for z ~ N(m, I).
      double v = c0_;
      if (a_.size() > 0) {
        if (a_.size() != m.size()) throw Error(ErrorKind::DimensionMismatch, "linear term");
        v += a_.dot(m);
      }
      if (identity_q_) v += static_cast<double>(m.size()) + m.squaredNorm();
      if (q_.size() > 0) {
        if (q_.rows() != m.size()) throw Error(ErrorKind::DimensionMismatch, "quadratic term");
        v += q_.trace() + m.dot(q_ * m);
      }
      return v;
    }
    case Kind::Separable: {
      const auto [nodes, weights] = gauss_hermite(order_);
      double v = combine_ == Combine::Product ? 1.0 : 0.0;
      for (Index i = 0; i < m.size(); ++i) {
        double e = 0.0;
        for (Index k = 0; k < nodes.size(); ++k) e += weights(k) * factor_(i, m(i) + nodes(k));
        v = combine_ == Combine::Product ? v * e : v + e;
      }
      return v;
    }
    case Kind::Opaque:
      throw Error(ErrorKind::NonDecomposable,
                  "complement function has no analytic expectation; use full Monte Carlo");
  }
  return 0.0;
}

std::pair<Vector, Vector> gauss_hermite(int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  Vector weights = es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), weights / weights.sum()};
}

double rb_expectation(const GlobalLis& lis, const GaussianPrior& prior,
                      const Matrix& reduced_states,
                      const std::function<double(const Vector&)>& h_r,
                      const ComplementFunction& h_perp, RbMode mode) {
  if (reduced_states.cols() != lis.rank()) {
    throw Error(ErrorKind::DimensionMismatch, "rb_expectation: chain dimension");
  }
  if (reduced_states.rows() == 0) throw Error(ErrorKind::EmptyChain, "rb_expectation");
  const double cs = h_perp.expectation(factor_prior(prior, lis).cs_mean);
  const double avg = standard_mc(reduced_states, h_r);
  return mode == RbMode::Product ? avg * cs : avg + cs;
}

double standard_mc(const Matrix& states, const std::function<double(const Vector&)>& h) {
  if (states.rows() == 0) throw Error(ErrorKind::EmptyChain, "standard_mc");
  double sum = 0.0;
  for (Index k = 0; k < states.rows(); ++k) sum += h(states.row(k).transpose());
  return sum / static_cast<double>(states.rows());
}

Vector sample_mean(const Matrix& states) {
  if (states.rows() == 0) throw Error(ErrorKind::EmptyChain, "sample_mean");
  return states.colwise().mean().transpose();
}

Matrix sample_cov(const Matrix& states) {
  if (states.rows() < 2) throw Error(ErrorKind::EmptyChain, "sample_cov needs two rows");
  const Matrix centered = states.rowwise() - states.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(states.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

double series_standard_error(std::span<const double> series) {
  const auto n = static_cast<Index>(series.size());
  if (n < 2) throw Error(ErrorKind::SeriesTooShort, "standard error needs two values");
  const Eigen::Map<const Vector> v(series.data(), n);
  const double var = (v.array() - v.mean()).square().sum() / static_cast<double>(n - 1);
  if (var == 0.0) return 0.0;
  return std::sqrt(var * integrated_autocorr_time(series) / static_cast<double>(n));
}

}  // namespace lisinfer
