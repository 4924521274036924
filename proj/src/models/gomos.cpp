#include "lisinfer/models/gomos.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lisinfer/error.hpp"
#include "lisinfer/models/synth.hpp"

namespace lisinfer {

namespace {

constexpr double kMaxLogDensity = 700.0;

class GomosLinearization final : public Linearization {
 public:
  GomosLinearization(const GomosModel& model, const Vector& x)
      : model_(model), bt_(model.densities_t(x)) {
    t_ = (-(model.cross_sections() * bt_ * model.geometry().transpose())).array().exp();
    output_ = Eigen::Map<const Vector>(t_.data(), t_.size());
  }

  const Vector& output() const override { return output_; }

  Matrix jac_apply(const Matrix& v) const override {
    const Index ng = model_.n_gas();
    const Index na = model_.n_alts();
    if (v.rows() != ng * na) throw Error(ErrorKind::DimensionMismatch, "gomos jac_apply");
    Matrix out(model_.obs_dim(), v.cols());
    for (Index k = 0; k < v.cols(); ++k) {
      const Eigen::Map<const Matrix> vm(v.col(k).data(), na, ng);
      const Matrix dtau =
          model_.cross_sections() * bt_.cwiseProduct(vm.transpose()) * model_.geometry().transpose();
      const Matrix dt = -t_.cwiseProduct(dtau);
      out.col(k) = Eigen::Map<const Vector>(dt.data(), dt.size());
    }
    return out;
  }

  Matrix jac_adjoint(const Matrix& w) const override {
    const Index ng = model_.n_gas();
    const Index na = model_.n_alts();
    const Index nl = model_.n_lambda();
    if (w.rows() != nl * na) throw Error(ErrorKind::DimensionMismatch, "gomos jac_adjoint");
    Matrix out(ng * na, w.cols());
    for (Index k = 0; k < w.cols(); ++k) {
      const Eigen::Map<const Matrix> wm(w.col(k).data(), nl, na);
      const Matrix g = bt_.cwiseProduct(model_.cross_sections().transpose() *
                                        t_.cwiseProduct(wm) * model_.geometry());
      const Matrix gt = -g.transpose();
      out.col(k) = Eigen::Map<const Vector>(gt.data(), gt.size());
    }
    return out;
  }

 private:
  const GomosModel& model_;
  Matrix bt_;
  Matrix t_;
  Vector output_;
};

}  // namespace

Matrix gomos_geometry(const Vector& radii, const Vector& tangent_radii) {
  const Index n = radii.size() - 1;
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "geometry needs at least one layer");
  for (Index i = 0; i < n; ++i) {
    if (!(radii(i + 1) > radii(i)) || !(radii(i) > 0.0)) {
      throw Error(ErrorKind::RadiiNotAscending, "layer radii must be positive and ascending");
    }
  }
  Matrix a = Matrix::Zero(tangent_radii.size(), n);
  for (Index j = 0; j < tangent_radii.size(); ++j) {
    const double r2 = tangent_radii(j) * tangent_radii(j);
    for (Index i = 0; i < n; ++i) {
      const double outer = radii(i + 1);
      if (outer <= tangent_radii(j)) continue;
      const double inner = std::sqrt(std::max(radii(i) * radii(i) - r2, 0.0));
      a(j, i) = 2.0 * (std::sqrt(outer * outer - r2) - inner);
    }
  }
  return a;
}

Matrix gomos_geometry(const Vector& radii) {
  const Index n = radii.size() - 1;
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "geometry needs at least one layer");
  const Vector mid = 0.5 * (radii.head(n) + radii.tail(n));
  return gomos_geometry(radii, mid);
}

Vector GomosConfig::layer_radii() const {
  return Vector::LinSpaced(n_alts + 1, earth_radius + z_bottom, earth_radius + z_top);
}

Vector GomosConfig::layer_altitudes() const {
  const Vector r = layer_radii();
  return (0.5 * (r.head(n_alts) + r.tail(n_alts))).array() - earth_radius;
}

Matrix gomos_cross_sections(const GomosConfig& config) {
  if (config.gas_strength.size() != config.n_gas) {
    throw Error(ErrorKind::DimensionMismatch, "gas_strength must have one entry per gas");
  }
  std::mt19937_64 rng(config.cross_section_seed);
  std::uniform_real_distribution<double> center(0.0, static_cast<double>(config.n_lambda));
  std::uniform_real_distribution<double> width(2.0, 6.0);
  std::uniform_real_distribution<double> height(0.5, 1.5);
  Matrix c(config.n_lambda, config.n_gas);
  for (Index g = 0; g < config.n_gas; ++g) {
    c.col(g).setConstant(0.1);
    for (Index b = 0; b < config.bumps_per_gas; ++b) {
      const double mu = center(rng);
      const double w = width(rng);
      const double h = height(rng);
      for (Index l = 0; l < config.n_lambda; ++l) {
        const double d = (static_cast<double>(l) - mu) / w;
        c(l, g) += h * std::exp(-0.5 * d * d);
      }
    }
    c.col(g) *= config.gas_strength(g);
  }
  return c;
}

GomosModel::GomosModel(Matrix geometry, Matrix cross_sections)
    : a_(std::move(geometry)), c_(std::move(cross_sections)) {
  if (a_.rows() != a_.cols()) throw Error(ErrorKind::DimensionMismatch, "geometry must be square");
  if (c_.size() == 0 || !(c_.minCoeff() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cross-sections must be positive");
  }
  if (a_.size() > 0 && a_.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "geometry entries must be nonnegative");
  }
}

Matrix GomosModel::densities_t(const Vector& x) const {
  if (x.size() != param_dim()) throw Error(ErrorKind::DimensionMismatch, "gomos parameter size");
  const Eigen::Map<const Matrix> xm(x.data(), n_alts(), n_gas());
  return xm.transpose().array().min(kMaxLogDensity).exp();
}

Vector GomosModel::apply(const Vector& x) const { return GomosLinearization(*this, x).output(); }

std::unique_ptr<Linearization> GomosModel::linearize(const Vector& x) const {
  return std::make_unique<GomosLinearization>(*this, x);
}

GaussianPrior gomos_prior(const GomosConfig& model, const GomosPriorConfig& prior,
                          const Vector& mean) {
  if (prior.sigma.size() != model.n_gas || mean.size() != model.n_gas * model.n_alts) {
    throw Error(ErrorKind::DimensionMismatch, "gomos prior configuration");
  }
  const Vector z = model.layer_altitudes();
  std::vector<GridPoint> grid;
  for (Index a = 0; a < model.n_alts; ++a) grid.emplace_back(z(a), 0.0);
  std::vector<Matrix> blocks;
  for (Index g = 0; g < model.n_gas; ++g) {
    blocks.push_back(kernel_matrix(grid, make_sq_exp_kernel(prior.sigma(g), prior.corr_len)));
  }
  return GaussianPrior(mean, block_diagonal(blocks));
}

Vector gomos_truth(const GomosProblemConfig& config) {
  const GomosConfig& m = config.model;
  if (config.base_log_density.size() != m.n_gas) {
    throw Error(ErrorKind::DimensionMismatch, "base_log_density must have one entry per gas");
  }
  const Vector z = m.layer_altitudes();
  Vector x(m.n_gas * m.n_alts);
  for (Index g = 0; g < m.n_gas; ++g) {
    for (Index a = 0; a < m.n_alts; ++a) {
      x(g * m.n_alts + a) = config.base_log_density(g) - (z(a) - m.z_bottom) / config.scale_height;
    }
  }
  return x;
}

GomosProblem make_gomos_problem(const GomosProblemConfig& config) {
  const GomosConfig& m = config.model;
  auto model = std::make_shared<const GomosModel>(gomos_geometry(m.layer_radii()),
                                                  gomos_cross_sections(m));
  const Vector truth = gomos_truth(config);

  Vector gas_mean = config.prior.mean;
  if (gas_mean.size() == 0) {
    const double z_mid = 0.5 * (m.z_bottom + m.z_top);
    gas_mean = config.base_log_density.array() - (z_mid - m.z_bottom) / config.scale_height;
  }
  if (gas_mean.size() != m.n_gas) {
    throw Error(ErrorKind::DimensionMismatch, "prior mean must have one entry per gas");
  }
  Vector mean(m.n_gas * m.n_alts);
  for (Index g = 0; g < m.n_gas; ++g) mean.segment(g * m.n_alts, m.n_alts).setConstant(gas_mean(g));

  const SynthData synth = synth_data(*model, truth, config.snr, config.noise_seed);
  GomosProblem out;
  out.model = model;
  out.truth = truth;
  out.noise_sigma = synth.sigma;
  out.problem.model = model;
  out.problem.prior = std::make_shared<const GaussianPrior>(gomos_prior(m, config.prior, mean));
  out.problem.noise = ObsNoise::isotropic(model->obs_dim(), synth.sigma);
  out.problem.data = synth.data;
  out.problem.validate();
  return out;
}

}  // namespace lisinfer
