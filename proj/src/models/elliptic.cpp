#include "lisinfer/models/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

#include "lisinfer/error.hpp"
#include "lisinfer/models/synth.hpp"

namespace lisinfer {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Gauss-Legendre rule on [0, 1].
std::pair<Vector, Vector> gauss_legendre01(int order) {
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double kk = static_cast<double>(k);
    jacobi(k, k - 1) = jacobi(k - 1, k) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  const Vector nodes = 0.5 * (es.eigenvalues().array() + 1.0);
  const Vector weights = es.eigenvectors().row(0).transpose().array().square();
  return {nodes, weights};
}

std::array<double, 4> shape(double xi, double eta) {
  return {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
}

class EllipticLinearization final : public Linearization {
 public:
  EllipticLinearization(const EllipticModel& model, const Vector& x) : model_(model) {
    kappa_ = x.array().exp();
    if (!kappa_.allFinite()) {
      throw Error(ErrorKind::ForwardSolveFailed, "permeability overflow");
    }
    const SpMat a = model.saddle_matrix(kappa_);
    solver_.compute(a);
    if (solver_.info() != Eigen::Success) {
      throw Error(ErrorKind::ForwardSolveFailed, "FEM system factorization failed");
    }
    const Index nn = model.node_count();
    Vector rhs = Vector::Zero(nn + 1);
    rhs.head(nn) = model.load();
    const Vector u = solver_.solve(rhs);
    if (!u.allFinite()) throw Error(ErrorKind::ForwardSolveFailed, "FEM solve failed");
    pressure_ = u.head(nn);
    output_ = model.observation() * pressure_;

    const Index ne = model.param_dim();
    q_.resize(4, ne);
    for (Index e = 0; e < ne; ++e) {
      const auto nodes = model.element_nodes(e);
      Eigen::Vector4d pe;
      for (int a = 0; a < 4; ++a) pe(a) = pressure_(nodes[a]);
      q_.col(e) = model.unit_element_stiffness() * pe;
    }
  }

  const Vector& output() const override { return output_; }
  const Vector& pressure() const { return pressure_; }

  Matrix jac_apply(const Matrix& v) const override {
    const Index ne = model_.param_dim();
    if (v.rows() != ne) throw Error(ErrorKind::DimensionMismatch, "elliptic jac_apply");
    const Index nn = model_.node_count();
    Matrix rhs = Matrix::Zero(nn + 1, v.cols());
    for (Index e = 0; e < ne; ++e) {
      const auto nodes = model_.element_nodes(e);
      for (int a = 0; a < 4; ++a) rhs.row(nodes[a]) -= (kappa_(e) * q_(a, e)) * v.row(e);
    }
    const Matrix du = solver_.solve(rhs);
    return model_.observation() * du.topRows(nn);
  }

  Matrix jac_adjoint(const Matrix& w) const override {
    if (w.rows() != model_.obs_dim()) {
      throw Error(ErrorKind::DimensionMismatch, "elliptic jac_adjoint");
    }
    const Index nn = model_.node_count();
    const Index ne = model_.param_dim();
    Matrix rhs = Matrix::Zero(nn + 1, w.cols());
    rhs.topRows(nn) = model_.observation().transpose() * w;
    // The saddle matrix is symmetric, so the forward factorization serves
    // the adjoint solve.
    const Matrix z = solver_.solve(rhs);
    Matrix out(ne, w.cols());
    for (Index e = 0; e < ne; ++e) {
      const auto nodes = model_.element_nodes(e);
      out.row(e).setZero();
      for (int a = 0; a < 4; ++a) out.row(e) -= (kappa_(e) * q_(a, e)) * z.row(nodes[a]);
    }
    return out;
  }

 private:
  const EllipticModel& model_;
  Vector kappa_;
  Eigen::SparseLU<SpMat> solver_;
  Vector pressure_;
  Vector output_;
  Matrix q_;  // unit element stiffness times element pressure, per element
};

}  // namespace

EllipticConfig EllipticConfig::defaults(Index nx, Index ny) {
  EllipticConfig c;
  c.nx = nx;
  c.ny = ny;
  c.sources = {{{0.0, 0.0}, 0.05, 1.0},
               {{3.0, 0.0}, 0.05, 2.0},
               {{3.0, 1.0}, 0.05, 3.0},
               {{0.0, 1.0}, 0.05, -6.0}};
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const double s1 = (block == 0 ? 0.1 : 2.1) + 0.2 * i;
        const double s2 = 0.1 + 0.2 * j;
        c.sensors.emplace_back(s1, s2);
      }
    }
  }
  return c;
}

EllipticModel::EllipticModel(EllipticConfig config) : cfg_(std::move(config)) {
  if (cfg_.nx < 1 || cfg_.ny < 1 || !(cfg_.lx > 0.0) || !(cfg_.ly > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "elliptic mesh must be nonempty");
  }
  if (cfg_.sensors.empty()) throw Error(ErrorKind::InvalidArgument, "no sensors");
  hx_ = cfg_.lx / static_cast<double>(cfg_.nx);
  hy_ = cfg_.ly / static_cast<double>(cfg_.ny);

  // Element stiffness by 2x2 Gauss quadrature (exact for Q1).
  const auto [gq, gw] = gauss_legendre01(2);
  ke_.setZero();
  for (int qi = 0; qi < 2; ++qi) {
    for (int qj = 0; qj < 2; ++qj) {
      const double xi = gq(qi);
      const double eta = gq(qj);
      const std::array<double, 4> dxi = {-(1 - eta), (1 - eta), eta, -eta};
      const std::array<double, 4> deta = {-(1 - xi), -xi, xi, (1 - xi)};
      const double w = gw(qi) * gw(qj) * hx_ * hy_;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          ke_(a, b) += w * (dxi[a] * dxi[b] / (hx_ * hx_) + deta[a] * deta[b] / (hy_ * hy_));
        }
      }
    }
  }

  const Index nn = node_count();
  const auto [lq, lw] = gauss_legendre01(cfg_.load_order);
  const auto source = [this](const GridPoint& s) {
    if (cfg_.source_fn) return cfg_.source_fn(s);
    double f = 0.0;
    for (const auto& p : cfg_.sources) {
      const double var = p.width * p.width;
      f += p.weight * std::exp(-(s - p.center).squaredNorm() / (2.0 * var)) /
           (2.0 * std::numbers::pi * var);
    }
    return f;
  };
  load_ = Vector::Zero(nn);
  for (Index e = 0; e < param_dim(); ++e) {
    const auto nodes = element_nodes(e);
    const double x0 = static_cast<double>(e % cfg_.nx) * hx_;
    const double y0 = static_cast<double>(e / cfg_.nx) * hy_;
    for (Index qi = 0; qi < lq.size(); ++qi) {
      for (Index qj = 0; qj < lq.size(); ++qj) {
        const double f = source(GridPoint(x0 + lq(qi) * hx_, y0 + lq(qj) * hy_));
        const auto n = shape(lq(qi), lq(qj));
        const double w = lw(qi) * lw(qj) * hx_ * hy_ * f;
        for (int a = 0; a < 4; ++a) load_(nodes[a]) += w * n[a];
      }
    }
  }

  boundary_ = Vector::Zero(nn);
  const Index stride = cfg_.nx + 1;
  for (Index i = 0; i < cfg_.nx; ++i) {
    for (const Index j : {Index{0}, cfg_.ny}) {
      boundary_(j * stride + i) += 0.5 * hx_;
      boundary_(j * stride + i + 1) += 0.5 * hx_;
    }
  }
  for (Index j = 0; j < cfg_.ny; ++j) {
    for (const Index i : {Index{0}, cfg_.nx}) {
      boundary_(j * stride + i) += 0.5 * hy_;
      boundary_((j + 1) * stride + i) += 0.5 * hy_;
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t s = 0; s < cfg_.sensors.size(); ++s) {
    const GridPoint& p = cfg_.sensors[s];
    if (p.x() < 0.0 || p.x() > cfg_.lx || p.y() < 0.0 || p.y() > cfg_.ly) {
      throw Error(ErrorKind::InvalidArgument, "sensor outside the domain");
    }
    const Index i = std::min<Index>(static_cast<Index>(p.x() / hx_), cfg_.nx - 1);
    const Index j = std::min<Index>(static_cast<Index>(p.y() / hy_), cfg_.ny - 1);
    const auto n = shape(p.x() / hx_ - static_cast<double>(i), p.y() / hy_ - static_cast<double>(j));
    const auto nodes = element_nodes(j * cfg_.nx + i);
    for (int a = 0; a < 4; ++a) {
      trip.emplace_back(static_cast<Index>(s), nodes[a], n[a]);
    }
  }
  obs_.resize(obs_dim(), nn);
  obs_.setFromTriplets(trip.begin(), trip.end());
}

std::array<Index, 4> EllipticModel::element_nodes(Index e) const {
  const Index i = e % cfg_.nx;
  const Index j = e / cfg_.nx;
  const Index stride = cfg_.nx + 1;
  return {j * stride + i, j * stride + i + 1, (j + 1) * stride + i + 1, (j + 1) * stride + i};
}

GridPoint EllipticModel::node(Index k) const {
  const Index stride = cfg_.nx + 1;
  return {static_cast<double>(k % stride) * hx_, static_cast<double>(k / stride) * hy_};
}

std::vector<GridPoint> EllipticModel::element_centers() const {
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(param_dim()));
  for (Index j = 0; j < cfg_.ny; ++j) {
    for (Index i = 0; i < cfg_.nx; ++i) {
      out.emplace_back((static_cast<double>(i) + 0.5) * hx_, (static_cast<double>(j) + 0.5) * hy_);
    }
  }
  return out;
}

SpMat EllipticModel::stiffness(const Vector& x) const {
  if (x.size() != param_dim()) throw Error(ErrorKind::DimensionMismatch, "stiffness");
  const Vector kappa = x.array().exp();
  return saddle_matrix(kappa).topLeftCorner(node_count(), node_count());
}

SpMat EllipticModel::saddle_matrix(const Vector& kappa) const {
  const Index nn = node_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(16 * param_dim() + 2 * nn));
  for (Index e = 0; e < param_dim(); ++e) {
    const auto nodes = element_nodes(e);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) trip.emplace_back(nodes[a], nodes[b], kappa(e) * ke_(a, b));
    }
  }
  for (Index k = 0; k < nn; ++k) {
    if (boundary_(k) != 0.0) {
      trip.emplace_back(k, nn, boundary_(k));
      trip.emplace_back(nn, k, boundary_(k));
    }
  }
  SpMat a(nn + 1, nn + 1);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Vector EllipticModel::pressure(const Vector& x) const {
  if (x.size() != param_dim()) throw Error(ErrorKind::DimensionMismatch, "elliptic pressure");
  return EllipticLinearization(*this, x).pressure();
}

Vector EllipticModel::apply(const Vector& x) const {
  if (x.size() != param_dim()) throw Error(ErrorKind::DimensionMismatch, "elliptic apply");
  return EllipticLinearization(*this, x).output();
}

std::unique_ptr<Linearization> EllipticModel::linearize(const Vector& x) const {
  if (x.size() != param_dim()) throw Error(ErrorKind::DimensionMismatch, "elliptic linearize");
  return std::make_unique<EllipticLinearization>(*this, x);
}

GaussianPrior elliptic_prior(const EllipticModel& model, const EllipticPriorConfig& config) {
  const auto centers = model.element_centers();
  return build_prior(centers, make_aniso_exp_kernel(config.sigma, config.corr_len, config.tensor),
                     Vector::Zero(model.param_dim()));
}

EllipticProblem make_elliptic_problem(const EllipticProblemConfig& config) {
  auto model = std::make_shared<const EllipticModel>(EllipticConfig::defaults(config.nx, config.ny));
  const EllipticModel truth_model(EllipticConfig::defaults(config.truth_nx, config.truth_ny));
  const GaussianPrior truth_prior = elliptic_prior(truth_model, config.prior);
  const Vector truth = truth_prior.sample(config.truth_seed, 1).col(0);
  const SynthData synth = synth_data(truth_model, truth, config.snr, config.noise_seed);

  EllipticProblem out;
  out.model = model;
  out.truth = truth;
  out.noise_sigma = synth.sigma;
  out.problem.model = model;
  out.problem.prior = std::make_shared<const GaussianPrior>(elliptic_prior(*model, config.prior));
  out.problem.noise = ObsNoise::isotropic(model->obs_dim(), synth.sigma);
  out.problem.data = synth.data;
  out.problem.validate();
  return out;
}

}  // namespace lisinfer
