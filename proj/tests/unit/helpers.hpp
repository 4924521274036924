#pragma once

#include <functional>
#include <random>

#include <Eigen/Dense>

#include "lisinfer/types.hpp"

namespace testing {

using lisinfer::Index;
using lisinfer::Matrix;
using lisinfer::Vector;

inline Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

inline Vector random_vector(Index n, unsigned seed) { return random_matrix(n, 1, seed).col(0); }

/// Well-conditioned SPD matrix B B^T / n + shift I.
inline Matrix random_spd(Index n, unsigned seed, double shift = 0.5) {
  const Matrix b = random_matrix(n, n, seed);
  return b * b.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

/// Central finite-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Orthogonal projector onto the column space of a.
inline Matrix orth_projector(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  return q * q.transpose();
}

}  // namespace testing

#include "lisinfer/model.hpp"

namespace testing {

inline lisinfer::ForwardProblem linear_problem(const Matrix& g, const lisinfer::GaussianPrior& prior,
                                               const lisinfer::ObsNoise& noise, const Vector& data) {
  lisinfer::ForwardProblem p;
  p.model = std::make_shared<lisinfer::LinearModel>(g);
  p.prior = std::make_shared<lisinfer::GaussianPrior>(prior);
  p.noise = noise;
  p.data = data;
  return p;
}

/// Exact posterior of a linear-Gaussian problem in information form.
inline std::pair<Vector, Matrix> info_posterior(const Matrix& g, const Matrix& prior_cov,
                                                const Vector& prior_mean, const Matrix& noise_cov,
                                                const Vector& data) {
  const Matrix prec = prior_cov.inverse() + g.transpose() * noise_cov.inverse() * g;
  const Matrix cov = prec.inverse();
  const Vector mean =
      cov * (prior_cov.inverse() * prior_mean + g.transpose() * noise_cov.inverse() * data);
  return {mean, Matrix(0.5 * (cov + cov.transpose()))};
}

/// Leading r generalized eigenvectors of (G^T N^-1 G, Gamma_pr^-1), normalized
/// so that W^T Gamma_pr^-1 W = I, plus all generalized eigenvalues (descending).
inline std::pair<Matrix, Vector> generalized_lis(const Matrix& g, const Matrix& prior_cov,
                                                 const Matrix& noise_cov, Index r) {
  const Matrix h = g.transpose() * noise_cov.inverse() * g;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(h, Matrix(prior_cov.inverse()));
  const Index n = h.rows();
  Matrix w(n, r);
  Vector vals(n);
  for (Index i = 0; i < n; ++i) vals(i) = es.eigenvalues()(n - 1 - i);
  for (Index i = 0; i < r; ++i) w.col(i) = es.eigenvectors().col(n - 1 - i);
  return {w, vals};
}

}  // namespace testing
