#pragma once

#include <cstdint>
#include <memory>

#include "lisinfer/model.hpp"

namespace lisinfer {

/// Random linear problem with n parameters and d < n observations, so the
/// Gauss-Newton Hessian has rank d.
struct LinearTestConfig {
  Index n = 20;
  Index d = 6;
  double prior_sigma = 1.0;
  double corr_len = 0.3;
  double noise_sigma = 0.1;
  /// Mean of the prior; zero or a smooth nonzero profile.
  bool nonzero_mean = false;
  std::uint64_t seed = 11;
};

struct LinearTestProblem {
  ForwardProblem problem;
  Matrix forward;
  Vector truth;
};

/// Prior: anisotropic exponential kernel (identity tensor) on n points of
/// the unit interval. Forward: standard normal entries scaled by 1/sqrt(n).
LinearTestProblem make_linear_test_problem(const LinearTestConfig& config);

}  // namespace lisinfer
