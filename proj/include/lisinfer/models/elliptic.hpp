#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "lisinfer/model.hpp"

namespace lisinfer {

struct PlumeSource {
  GridPoint center;
  double width = 0.05;
  double weight = 1.0;
};

struct EllipticConfig {
  Index nx = 24;
  Index ny = 8;
  double lx = 3.0;
  double ly = 1.0;
  /// Normalized Gaussian plumes; the default puts weights 1, 2, 3, -6 at
  /// the corners (0,0), (3,0), (3,1), (0,1).
  std::vector<PlumeSource> sources;
  /// Overrides the plumes when set.
  std::function<double(const GridPoint&)> source_fn;
  std::vector<GridPoint> sensors;
  /// Gauss-Legendre points per direction for the load integrals.
  int load_order = 8;

  /// Default corner plumes and 50 sensors on two 5x5 blocks.
  static EllipticConfig defaults(Index nx, Index ny);
};

/// -div(exp(x) grad p) = f on a rectangle with zero flux and zero mean
/// boundary pressure. Q1 elements with one log-permeability value per
/// element (element e = j * nx + i); the boundary condition enters through
/// a Lagrange multiplier. Observations are bilinear interpolants of the
/// pressure at the sensors.
class EllipticModel final : public ForwardModel {
 public:
  explicit EllipticModel(EllipticConfig config);

  Index param_dim() const override { return cfg_.nx * cfg_.ny; }
  Index obs_dim() const override { return static_cast<Index>(cfg_.sensors.size()); }
  Vector apply(const Vector& x) const override;
  std::unique_ptr<Linearization> linearize(const Vector& x) const override;

  const EllipticConfig& config() const { return cfg_; }
  Index node_count() const { return (cfg_.nx + 1) * (cfg_.ny + 1); }
  GridPoint node(Index k) const;
  std::vector<GridPoint> element_centers() const;
  const Vector& load() const { return load_; }
  /// Trapezoid weights of the boundary integral over nodal values.
  const Vector& boundary_weights() const { return boundary_; }
  const Eigen::SparseMatrix<double>& observation() const { return obs_; }

  /// Nodal pressure for log-permeability x.
  Vector pressure(const Vector& x) const;
  /// Stiffness matrix for permeability exp(x), without the constraint.
  Eigen::SparseMatrix<double> stiffness(const Vector& x) const;
  /// [K c; c^T 0] for element permeabilities kappa.
  Eigen::SparseMatrix<double> saddle_matrix(const Vector& kappa) const;
  /// Nodes (i,j), (i+1,j), (i+1,j+1), (i,j+1) of element e.
  std::array<Index, 4> element_nodes(Index e) const;
  const Eigen::Matrix4d& unit_element_stiffness() const { return ke_; }

 private:
  EllipticConfig cfg_;
  double hx_ = 0.0;
  double hy_ = 0.0;
  Eigen::Matrix4d ke_;  // element stiffness for unit permeability
  Vector load_;
  Vector boundary_;
  Eigen::SparseMatrix<double> obs_;
};

struct EllipticPriorConfig {
  double sigma = 1.15;
  double corr_len = 0.18;
  Eigen::Matrix2d tensor = (Eigen::Matrix2d() << 0.55, -0.45, -0.45, 0.55).finished();
};

GaussianPrior elliptic_prior(const EllipticModel& model, const EllipticPriorConfig& config);

struct EllipticProblemConfig {
  Index nx = 24;
  Index ny = 8;
  /// Mesh on which the true field is drawn and the data generated.
  Index truth_nx = 48;
  Index truth_ny = 16;
  double snr = 10.0;
  std::uint64_t truth_seed = 1;
  std::uint64_t noise_seed = 2;
  EllipticPriorConfig prior;
};

struct EllipticProblem {
  ForwardProblem problem;
  std::shared_ptr<const EllipticModel> model;
  Vector truth;  // on the truth mesh
  double noise_sigma = 0.0;
};

EllipticProblem make_elliptic_problem(const EllipticProblemConfig& config);

}  // namespace lisinfer
