#include "lisinfer/mcmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "lisinfer/error.hpp"

namespace lisinfer {

namespace {

Eigen::LLT<Matrix> factor_precond(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "MALA preconditioner is not SPD");
  }
  return llt;
}

bool is_finite(const TargetEval& e) {
  return std::isfinite(e.log_density) && e.gradient.allFinite();
}

}  // namespace

LogTarget full_posterior_target(const ForwardProblem& problem) {
  return [&problem](const Vector& x) {
    const PosteriorPoint p = evaluate_posterior(problem, x);
    return TargetEval{p.log_post, p.grad, p.log_lik};
  };
}

void MalaConfig::validate() const {
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "target_accept must lie in (0, 1)");
  }
  if (thin < 1) throw Error(ErrorKind::InvalidArgument, "thin must be >= 1");
  if (refactor_every < 1) throw Error(ErrorKind::InvalidArgument, "refactor_every must be >= 1");
  if (!(adapt_decay > 0.0 && adapt_decay <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "adapt_decay must lie in (0, 1]");
  }
}

Chain run_mala(const LogTarget& target, Index dim, const MalaConfig& config, const Vector& init,
               Index steps, std::uint64_t seed) {
  config.validate();
  if (init.size() != dim) throw Error(ErrorKind::DimensionMismatch, "run_mala: init size");
  steps = std::max<Index>(steps, 0);

  const Index kept = steps / config.thin;
  Chain chain;
  chain.states.resize(kept, dim);
  chain.log_post.resize(kept);
  chain.log_lik.resize(kept);
  chain.accepted.assign(static_cast<std::size_t>(kept), 0);
  chain.step_sizes.resize(kept);
  chain.wall_times.resize(kept);

  double h = config.step_size > 0.0 ? config.step_size
                                    : (dim > 0 ? std::pow(static_cast<double>(dim), -1.0 / 3.0)
                                               : 1.0);
  chain.final_step_size = h;
  if (steps == 0) return chain;

  Matrix cov = config.precond_cov.size() == 0 ? Matrix(Matrix::Identity(dim, dim))
                                              : config.precond_cov;
  if (cov.rows() != dim || cov.cols() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "run_mala: preconditioner size");
  }
  const bool empirical = config.adapt && config.preconditioner == PreconditionerKind::Empirical;
  const bool use_precond = config.preconditioner != PreconditionerKind::Identity;
  if (!use_precond) cov.setIdentity();
  Eigen::LLT<Matrix> chol = factor_precond(cov);
  Matrix c = chol.matrixL();

  const double weight0 = config.empirical_weight > 0 ? static_cast<double>(config.empirical_weight)
                                                     : 10.0 * static_cast<double>(dim);
  Vector run_mean = init;
  Matrix run_cov = cov;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();

  Vector x = init;
  TargetEval cur;
  try {
    cur = target(x);
    if (!is_finite(cur)) {
      throw Error(ErrorKind::TargetEvaluationFailed, "target is not finite at the initial state");
    }
  } catch (const std::exception& e) {
    chain.failed = true;
    chain.failure = e.what();
    chain.states.resize(0, dim);
    chain.log_post.resize(0);
    chain.log_lik.resize(0);
    chain.accepted.clear();
    chain.step_sizes.resize(0);
    chain.wall_times.resize(0);
    return chain;
  }

  Vector xi(dim);
  Index row = 0;
  for (Index step = 0; step < steps; ++step) {
    for (Index i = 0; i < dim; ++i) xi(i) = normal(rng);
    const double u = uniform(rng);

    // Forward move: x' = x + (h/2) C C^T g + sqrt(h) C xi.
    const Vector ctg = c.transpose() * cur.gradient;
    const Vector prop = x + c * (0.5 * h * ctg + std::sqrt(h) * xi);

    bool accept = false;
    double alpha = 0.0;
    TargetEval next;
    try {
      next = target(prop);
    } catch (const std::exception& e) {
      chain.failed = true;
      chain.failure = e.what();
      break;
    }
    if (is_finite(next)) {
      // Reverse move residual in whitened form: C^{-1}(x - x') - (h/2) C^T g'.
      const Vector back = chol.matrixL().solve(x - prop) - 0.5 * h * (c.transpose() * next.gradient);
      const double log_q_rev = -back.squaredNorm() / (2.0 * h);
      const double log_q_fwd = -0.5 * xi.squaredNorm();
      const double log_alpha = next.log_density - cur.log_density + log_q_rev - log_q_fwd;
      alpha = std::isfinite(log_alpha) ? std::min(1.0, std::exp(log_alpha)) : 0.0;
      accept = u < alpha;
    }
    ++chain.proposals;
    if (accept) {
      x = prop;
      cur = std::move(next);
      ++chain.accepted_total;
    }

    if (config.adapt) {
      const double t = static_cast<double>(config.adapt_offset + step + 1);
      const double gain = std::pow(t, -config.adapt_decay);
      h = std::clamp(h * std::exp(gain * (alpha - config.target_accept)), 1e-12, 1e6);
      if (empirical) {
        const double count = weight0 + static_cast<double>(step + 1);
        const Vector delta = x - run_mean;
        run_mean += delta / count;
        run_cov += ((delta * (x - run_mean).transpose()) - run_cov) / count;
        if ((step + 1) % config.refactor_every == 0) {
          Matrix reg = 0.5 * (run_cov + run_cov.transpose());
          reg.diagonal().array() += config.jitter * reg.trace() / static_cast<double>(dim);
          Eigen::LLT<Matrix> trial(reg);
          if (trial.info() == Eigen::Success) {
            chol = std::move(trial);
            c = chol.matrixL();
          }
        }
      }
    }

    if ((step + 1) % config.thin == 0 && row < kept) {
      chain.states.row(row) = x.transpose();
      chain.log_post(row) = cur.log_density;
      chain.log_lik(row) = cur.log_likelihood;
      chain.accepted[static_cast<std::size_t>(row)] = accept ? 1 : 0;
      chain.step_sizes(row) = h;
      chain.wall_times(row) =
          config.record_timing
              ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
              : 0.0;
      ++row;
    }
  }
  chain.final_step_size = h;
  if (row < kept) {
    chain.states.conservativeResize(row, dim);
    chain.log_post.conservativeResize(row);
    chain.log_lik.conservativeResize(row);
    chain.accepted.resize(static_cast<std::size_t>(row));
    chain.step_sizes.conservativeResize(row);
    chain.wall_times.conservativeResize(row);
  }
  return chain;
}

Matrix laplace_covariance(const ForwardProblem& problem, const Vector& x) {
  const Index n = problem.param_dim();
  Matrix m = ppgnh_dense(problem, x);
  m.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularSystem, "Gauss-Newton posterior Hessian is not SPD");
  }
  const SymFactor& f = problem.prior->factor();
  Matrix cov = f.color(f.color(llt.solve(Matrix::Identity(n, n))).transpose());
  return 0.5 * (cov + cov.transpose());
}

MapResult map_point(const ForwardProblem& problem, const Vector& init, double tol,
                    Index max_iters) {
  problem.validate();
  const SymFactor& f = problem.prior->factor();

  MapResult res;
  res.point = init;
  PosteriorPoint cur = evaluate_posterior(problem, init);
  if (!std::isfinite(cur.log_post) || !cur.grad.allFinite()) {
    throw Error(ErrorKind::MapNotFound, "log posterior is not finite at the initial point");
  }
  const double gate = tol * (1.0 + cur.grad.norm());
  res.log_post = cur.log_post;
  res.grad_norm = cur.grad.norm();

  for (Index it = 0; it < max_iters; ++it) {
    if (res.grad_norm <= gate) {
      res.converged = true;
      return res;
    }
    // Whitened Gauss-Newton system (L^T H L + I) dw = L^T g, step = L dw.
    Matrix m = ppgnh_dense(problem, res.point);
    m.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) break;
    const Vector step = f.color(llt.solve(f.transpose_apply(cur.grad)));
    const double slope = cur.grad.dot(step);
    if (!(slope > 0.0)) break;

    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const Vector trial = res.point + alpha * step;
      PosteriorPoint p;
      try {
        p = evaluate_posterior(problem, trial);
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(p.log_post) && p.log_post >= cur.log_post + 1e-4 * alpha * slope) {
        res.point = trial;
        cur = std::move(p);
        moved = true;
        break;
      }
    }
    res.iterations = it + 1;
    res.log_post = cur.log_post;
    res.grad_norm = cur.grad.norm();
    if (!moved) break;
  }
  res.converged = res.grad_norm <= gate;
  return res;
}

Vector autocorrelation(std::span<const double> series, Index max_lag) {
  const auto n = static_cast<Index>(series.size());
  if (max_lag < 0 || n <= max_lag) {
    throw Error(ErrorKind::SeriesTooShort, "series length must exceed max_lag");
  }
  const Eigen::Map<const Vector> x(series.data(), n);
  const Vector centered = x.array() - x.mean();
  const double c0 = centered.squaredNorm();
  Vector rho(max_lag + 1);
  if (c0 <= 0.0 || !std::isfinite(c0)) {
    rho.setOnes();
    return rho;
  }
  for (Index k = 0; k <= max_lag; ++k) {
    rho(k) = centered.head(n - k).dot(centered.tail(n - k)) / c0;
  }
  return rho;
}

double integrated_autocorr_time(std::span<const double> series) {
  const auto n = static_cast<Index>(series.size());
  if (n < 2) throw Error(ErrorKind::SeriesTooShort, "need at least two states");
  const Eigen::Map<const Vector> x(series.data(), n);
  const Vector centered = x.array() - x.mean();
  const double c0 = centered.squaredNorm();
  if (c0 <= 0.0 || !std::isfinite(c0)) return static_cast<double>(n);

  auto rho = [&](Index k) { return centered.head(n - k).dot(centered.tail(n - k)) / c0; };
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);  // initial monotone sequence
    sum += pair;
    prev_pair = pair;
  }
  return std::max(-1.0 + 2.0 * sum, 1.0 / static_cast<double>(n));
}

double ess(std::span<const double> series) {
  return static_cast<double>(series.size()) / integrated_autocorr_time(series);
}

Matrix discard_burn_in(const Matrix& states, double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  const auto skip = static_cast<Index>(std::floor(fraction * static_cast<double>(states.rows())));
  return states.bottomRows(states.rows() - skip);
}

std::vector<double> column_series(const Matrix& states, Index col) {
  std::vector<double> out(static_cast<std::size_t>(states.rows()));
  for (Index i = 0; i < states.rows(); ++i) out[static_cast<std::size_t>(i)] = states(i, col);
  return out;
}

}  // namespace lisinfer
