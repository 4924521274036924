#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lisinfer/mcmc.hpp"
#include "lisinfer/model.hpp"

namespace lisinfer {

/// Truncated ppGNH eigenpairs at one sample, in whitened coordinates.
struct EigenPacket {
  Vector point;
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

/// Eigenpairs of L^T H(x) L with value >= tau_loc. max_rank <= 0 selects
/// min(n, d).
EigenPacket local_lis(const ForwardProblem& problem, const Vector& x, double tau_loc,
                      Index max_rank, std::uint64_t seed, const MatFreeOptions& options = {});

/// Running sum of packet matrices V Lambda V^T kept as a factor F with
/// sum = F F^T. Columns are recompressed by QR and a small eigensolve once
/// they outgrow four times the rank found at the previous compression.
class LisAccumulator {
 public:
  LisAccumulator() = default;
  explicit LisAccumulator(Index n);

  void add(const EigenPacket& packet);

  Index dim() const { return n_; }
  Index count() const { return count_; }
  Index stored_columns() const { return factor_.cols(); }

  /// Dense (1/m) sum_k V_k Lambda_k V_k^T.
  Matrix average() const;
  /// Eigenpairs of the average with value >= threshold.
  TruncatedEig eigen(double threshold) const;

 private:
  void compress();

  Index n_ = 0;
  Index count_ = 0;
  Index compressed_rank_ = 0;
  Matrix factor_;
};

LisAccumulator accumulate(LisAccumulator acc, const EigenPacket& packet);

struct GlobalLis {
  Matrix psi;    // whitened orthonormal basis, n x r
  Vector gamma;  // descending
  Matrix phi;    // L psi
  Matrix xi;     // L^{-T} psi
  Index sample_count = 0;

  Index dim() const { return psi.rows(); }
  Index rank() const { return psi.cols(); }
  /// Oblique projector phi xi^T (dense n x n).
  Matrix projector() const;
};

/// Completes a whitened basis into a GlobalLis: re-orthonormalizes psi
/// (unless told not to) and builds phi and xi from the prior factor.
GlobalLis make_global_lis(const GaussianPrior& prior, Matrix psi, Vector gamma,
                          Index sample_count, bool reorthonormalize = true);

GlobalLis global_lis(const LisAccumulator& acc, const GaussianPrior& prior, double tau_g);

/// LIS together with a whitened complement basis psi_perp, completed by
/// Householder reflections.
class LisCoordinates {
 public:
  LisCoordinates(const GlobalLis& lis, const GaussianPrior& prior);

  const GlobalLis& lis() const { return lis_; }
  const Matrix& psi_perp() const { return psi_perp_; }
  const Matrix& phi_perp() const { return phi_perp_; }
  const Matrix& xi_perp() const { return xi_perp_; }

  /// (xi_r^T x, xi_perp^T x)
  std::pair<Vector, Vector> project(const Vector& x) const;
  /// phi_r x_r + phi_perp x_perp
  Vector reconstruct(const Vector& x_r, const Vector& x_perp) const;

 private:
  GlobalLis lis_;
  Matrix psi_perp_;
  Matrix phi_perp_;
  Matrix xi_perp_;
};

/// Posterior restricted to the LIS with the complement held at its prior
/// mean: x = phi x_r + (I - Pi) mu_pr.
class ReducedPosterior {
 public:
  ReducedPosterior(ForwardProblem problem, GlobalLis lis);

  Index dim() const { return lis_.rank(); }
  const GlobalLis& lis() const { return lis_; }
  const ForwardProblem& problem() const { return problem_; }
  /// (I - Pi) mu_pr
  const Vector& offset() const { return offset_; }
  /// xi_r^T mu_pr
  const Vector& prior_mean() const { return prior_mean_; }

  Vector to_full(const Vector& x_r) const;
  /// xi_r^T x
  Vector to_reduced(const Vector& x) const;
  TargetEval evaluate(const Vector& x_r) const;
  double log_density(const Vector& x_r) const;

 private:
  ForwardProblem problem_;
  GlobalLis lis_;
  Vector offset_;
  Vector prior_mean_;
};

double reduced_log_posterior(const ForwardProblem& problem, const GlobalLis& lis,
                             const Vector& x_r);
Vector reduced_grad_log_posterior(const ForwardProblem& problem, const GlobalLis& lis,
                                  const Vector& x_r);
/// Target over x_r that owns copies of the problem and the LIS.
LogTarget reduced_target(const ForwardProblem& problem, const GlobalLis& lis);

/// sqrt(1 - ||(Psi_a D_a)^T (Psi_b D_b)||_F^2) with D_ii = (gamma_i / sum gamma)^{1/4}.
/// Returns 1 when either subspace is empty.
double weighted_subspace_distance(const GlobalLis& a, const GlobalLis& b);

struct AdaptConfig {
  double tau_loc = 0.1;
  /// <= 0 selects tau_loc.
  double tau_g = 0.0;
  Index subchain_len = 200;
  Index max_iters = 200;
  double dist_tol = 1e-6;
  /// Cap on local Hessian eigensolves including the one at the MAP; <= 0 means none.
  Index max_hessians = 0;
  /// Local eigensolve rank cap; <= 0 selects min(n, d).
  Index max_rank = 0;
  std::uint64_t seed = 0;
  double map_tol = 1e-8;
  Index map_max_iters = 200;
  /// Metropolized independence updates of the complement after each subchain.
  bool conditional_update = false;
  Index conditional_steps = 10;
  bool record_timing = true;
  MatFreeOptions eig;
};

struct AdaptTraceRow {
  Index iter = 0;
  Index rank = 0;
  double distance = 0.0;
  Index hessian_evals = 0;
  double wall_time = 0.0;
  double acceptance = 0.0;
  /// Lag-1 autocorrelation of the subchain log-likelihood; NaN when undefined.
  double loglik_lag1 = 0.0;
  Vector gamma;
};

struct AdaptResult {
  GlobalLis lis;
  std::vector<AdaptTraceRow> trace;
  MapResult map;
  Index hessian_evals = 0;
  bool converged = false;
  bool budget_exhausted = false;
  /// Subchain step size after the last iteration.
  double step_size = 0.0;
};

/// Adaptive LIS construction: starting from the MAP, alternate a short MALA
/// chain on the reduced posterior with a local eigensolve at its last state,
/// until successive subspaces are closer than dist_tol or the budget ends.
AdaptResult adapt_lis(const ForwardProblem& problem, const AdaptConfig& config);

/// MALA settings used for reduced chains: fixed diag(1 / (1 + gamma))
/// preconditioner, Empirical when adapt_precond is set.
MalaConfig reduced_mala_config(const GlobalLis& lis, bool adapt_precond);

}  // namespace lisinfer
