#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lisinfer/model.hpp"

namespace lisinfer {

struct TargetEval {
  double log_density = 0.0;
  Vector gradient;
  /// Optional diagnostic; NaN when the target has no likelihood split.
  double log_likelihood = 0.0;
};

/// Unnormalized log density with gradient. Exceptions abort a chain;
/// non-finite values reject the proposal.
using LogTarget = std::function<TargetEval(const Vector&)>;

LogTarget full_posterior_target(const ForwardProblem& problem);

enum class PreconditionerKind { Identity, Fixed, Empirical };

struct MalaConfig {
  /// Initial step size h; <= 0 selects dim^{-1/3}.
  double step_size = 0.0;
  bool adapt = true;
  double target_accept = 0.574;
  /// Robbins-Monro gain t^{-adapt_decay}.
  double adapt_decay = 0.6;
  /// Adaptation counter at the first step (continues a previous run).
  Index adapt_offset = 0;
  PreconditionerKind preconditioner = PreconditionerKind::Identity;
  /// Preconditioner covariance for Fixed, initial value for Empirical.
  /// Empty means identity.
  Matrix precond_cov;
  /// Pseudo-count given to precond_cov in the running empirical covariance;
  /// <= 0 selects 10 * dim.
  Index empirical_weight = 0;
  Index refactor_every = 20;
  /// Regularization added to the empirical covariance, relative to trace/dim.
  double jitter = 1e-8;
  Index thin = 1;
  bool record_timing = true;

  void validate() const;
};

/// Recorded MCMC states (one row per kept step) with per-row diagnostics.
struct Chain {
  Matrix states;
  Vector log_post;
  Vector log_lik;
  std::vector<std::uint8_t> accepted;
  Vector step_sizes;
  Vector wall_times;

  Index proposals = 0;
  Index accepted_total = 0;
  double final_step_size = 0.0;
  bool failed = false;
  std::string failure;

  Index steps() const { return states.rows(); }
  Index dim() const { return states.cols(); }
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted_total) / proposals;
  }
};

/// Preconditioned Metropolis-adjusted Langevin chain:
///   x' = x + (h/2) P grad(x) + sqrt(h) C xi,   P = C C^T.
/// With adapt on, log h follows a Robbins-Monro recursion toward
/// target_accept, and an Empirical preconditioner tracks the running
/// covariance of the chain.
Chain run_mala(const LogTarget& target, Index dim, const MalaConfig& config, const Vector& init,
               Index steps, std::uint64_t seed);

struct MapResult {
  Vector point;
  double log_post = 0.0;
  double grad_norm = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Gauss-Newton with Armijo backtracking on the negative log posterior.
/// Converged when ||grad|| <= tol (1 + ||grad(init)||). A non-converged
/// result carries the best iterate.
MapResult map_point(const ForwardProblem& problem, const Vector& init, double tol,
                    Index max_iters);

/// (L^T H(x) L + I)^{-1} mapped back: the inverse Gauss-Newton Hessian of
/// the negative log posterior at x.
Matrix laplace_covariance(const ForwardProblem& problem, const Vector& x);

/// Normalized autocorrelation for lags 0..max_lag by direct sums.
/// A constant series has autocorrelation 1 at every lag.
Vector autocorrelation(std::span<const double> series, Index max_lag);

/// Integrated autocorrelation time by Geyer's initial positive sequence.
/// A constant series returns its length (one effective sample).
double integrated_autocorr_time(std::span<const double> series);

/// series.size() / integrated_autocorr_time(series)
double ess(std::span<const double> series);

/// Rows [floor(fraction * steps), steps) of a recorded state matrix.
Matrix discard_burn_in(const Matrix& states, double fraction);

std::vector<double> column_series(const Matrix& states, Index col);

}  // namespace lisinfer
