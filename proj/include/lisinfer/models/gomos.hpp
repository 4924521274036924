#pragma once

#include <cstdint>
#include <memory>

#include "lisinfer/model.hpp"

namespace lisinfer {

/// Chord lengths of tangent rays through spherical shells. radii holds the
/// n + 1 ascending shell boundaries and tangent_radii the n ray tangent
/// radii. A(j, i) = 2 (sqrt(R_{i+1}^2 - r_j^2) - sqrt(max(R_i^2 - r_j^2, 0)))
/// when R_{i+1} > r_j, else 0.
Matrix gomos_geometry(const Vector& radii, const Vector& tangent_radii);
/// Tangent radii at the layer midpoints.
Matrix gomos_geometry(const Vector& radii);

struct GomosConfig {
  Index n_gas = 4;
  Index n_alts = 12;
  Index n_lambda = 30;
  double earth_radius = 6370.0;
  double z_bottom = 10.0;
  double z_top = 60.0;
  /// Cross-section scale per gas; gas 4 is nearly invisible by default.
  Vector gas_strength = (Vector(4) << 1.0, 0.2, 0.1, 1e-5).finished();
  Index bumps_per_gas = 3;
  std::uint64_t cross_section_seed = 7;

  Vector layer_radii() const;
  /// Altitudes of the layer midpoints (km above the surface).
  Vector layer_altitudes() const;
};

/// Smooth positive spectra: per gas a baseline plus Gaussian bumps in the
/// wavelength index, scaled by gas_strength. n_lambda x n_gas.
Matrix gomos_cross_sections(const GomosConfig& config);

/// Transmissions T = exp(-C B^T A^T), returned as vec(T) (column-major,
/// index alt * n_lambda + lambda). Parameters are log densities ordered
/// gas-major: x[gas * n_alts + alt] = log B(alt, gas).
class GomosModel final : public ForwardModel {
 public:
  GomosModel(Matrix geometry, Matrix cross_sections);

  Index n_gas() const { return c_.cols(); }
  Index n_alts() const { return a_.rows(); }
  Index n_lambda() const { return c_.rows(); }
  Index param_dim() const override { return n_gas() * n_alts(); }
  Index obs_dim() const override { return n_lambda() * n_alts(); }
  Vector apply(const Vector& x) const override;
  std::unique_ptr<Linearization> linearize(const Vector& x) const override;

  const Matrix& geometry() const { return a_; }
  const Matrix& cross_sections() const { return c_; }
  /// B^T (n_gas x n_alts) from x; log densities are clamped at 700.
  Matrix densities_t(const Vector& x) const;

 private:
  Matrix a_;
  Matrix c_;
};

struct GomosPriorConfig {
  Vector sigma = (Vector(4) << 5.22, 9.79, 23.66, 83.18).finished();
  double corr_len = 10.0;
  /// Prior mean per gas; empty selects the true log density at the middle
  /// altitude.
  Vector mean;
};

struct GomosProblemConfig {
  GomosConfig model;
  GomosPriorConfig prior;
  /// True log density: log(base_density) - (z - z_bottom) / scale_height.
  Vector base_log_density = (Vector(4) << -7.0, -7.0, -7.0, -7.0).finished();
  double scale_height = 8.0;
  double snr = 100.0;
  std::uint64_t noise_seed = 3;
};

struct GomosProblem {
  ForwardProblem problem;
  std::shared_ptr<const GomosModel> model;
  Vector truth;
  double noise_sigma = 0.0;
};

/// Block-diagonal prior over gases, squared-exponential in altitude.
GaussianPrior gomos_prior(const GomosConfig& model, const GomosPriorConfig& prior,
                          const Vector& mean);

Vector gomos_truth(const GomosProblemConfig& config);

GomosProblem make_gomos_problem(const GomosProblemConfig& config);

}  // namespace lisinfer
