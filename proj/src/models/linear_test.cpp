#include "lisinfer/models/linear_test.hpp"

#include <cmath>
#include <vector>

#include "lisinfer/error.hpp"

namespace lisinfer {

LinearTestProblem make_linear_test_problem(const LinearTestConfig& config) {
  if (config.n < 1 || config.d < 1) throw Error(ErrorKind::InvalidArgument, "empty linear problem");
  if (!(config.noise_sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_sigma must be > 0");
  std::vector<GridPoint> grid;
  const double step = config.n > 1 ? 1.0 / static_cast<double>(config.n - 1) : 0.0;
  for (Index i = 0; i < config.n; ++i) grid.emplace_back(step * static_cast<double>(i), 0.0);

  Vector mean = Vector::Zero(config.n);
  if (config.nonzero_mean) {
    for (Index i = 0; i < config.n; ++i) mean(i) = 1.0 + 0.5 * std::sin(3.0 * grid[i].x());
  }
  auto prior = std::make_shared<const GaussianPrior>(build_prior(
      grid, make_aniso_exp_kernel(config.prior_sigma, config.corr_len, Eigen::Matrix2d::Identity()),
      mean));

  LinearTestProblem out;
  out.forward = gaussian_matrix(config.d, config.n, derive_seed(config.seed, 0)) /
                std::sqrt(static_cast<double>(config.n));
  out.truth = prior->sample(derive_seed(config.seed, 1), 1).col(0);
  const Vector noise = config.noise_sigma * gaussian_matrix(config.d, 1, derive_seed(config.seed, 2)).col(0);
  out.problem.model = std::make_shared<const LinearModel>(out.forward);
  out.problem.prior = prior;
  out.problem.noise = ObsNoise::isotropic(config.d, config.noise_sigma);
  out.problem.data = out.forward * out.truth + noise;
  out.problem.validate();
  return out;
}

}  // namespace lisinfer
