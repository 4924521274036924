#include "lisinfer/lis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "lisinfer/error.hpp"

namespace lisinfer {

namespace {

// Orthonormal Q and small symmetric G with F F^T = Q G Q^T.
std::pair<Matrix, Matrix> reduce_factor(const Matrix& f) {
  const Index n = f.rows();
  const Index k = std::min(n, f.cols());
  Eigen::HouseholderQR<Matrix> qr(f);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Matrix g = r * r.transpose();
  g = 0.5 * (g + g.transpose());
  return {q, g};
}

constexpr std::uint64_t kStreamEig = 1;
constexpr std::uint64_t kStreamChain = 2;
constexpr std::uint64_t kStreamCs = 3;

std::uint64_t iteration_seed(std::uint64_t base, std::uint64_t stream, Index iter) {
  return derive_seed(derive_seed(base, stream), static_cast<std::uint64_t>(iter));
}

}  // namespace

EigenPacket local_lis(const ForwardProblem& problem, const Vector& x, double tau_loc,
                      Index max_rank, std::uint64_t seed, const MatFreeOptions& options) {
  if (!(tau_loc > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau_loc must be > 0");
  const Index n = problem.param_dim();
  if (max_rank <= 0) max_rank = std::min(n, problem.obs_dim());
  const auto lin = problem.model->linearize(x);
  const BlockAction action = [&](const Matrix& v) { return ppgnh_apply(problem, *lin, v); };
  TruncatedEig eig = truncated_eig_matfree(action, n, tau_loc, max_rank, seed, options);
  return EigenPacket{x, std::move(eig.values), std::move(eig.vectors)};
}

LisAccumulator::LisAccumulator(Index n) : n_(n), factor_(n, 0) {}

void LisAccumulator::add(const EigenPacket& packet) {
  if (n_ == 0 && count_ == 0) {
    n_ = packet.vectors.rows();
    factor_.resize(n_, 0);
  }
  if (packet.vectors.rows() != n_ || packet.vectors.cols() != packet.values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "packet dimension differs from accumulator");
  }
  const Index old = factor_.cols();
  const Index l = packet.size();
  factor_.conservativeResize(n_, old + l);
  for (Index i = 0; i < l; ++i) {
    factor_.col(old + i) = std::sqrt(std::max(packet.values(i), 0.0)) * packet.vectors.col(i);
  }
  ++count_;
  if (factor_.cols() > 4 * std::max<Index>(compressed_rank_, 1) || factor_.cols() > n_) {
    compress();
  }
}

void LisAccumulator::compress() {
  if (factor_.cols() == 0) return;
  const auto [q, g] = reduce_factor(factor_);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector& s = es.eigenvalues();
  const double cutoff = 1e-14 * std::max(s.maxCoeff(), 0.0);
  Index keep = 0;
  for (Index i = 0; i < s.size(); ++i) keep += s(i) > cutoff ? 1 : 0;
  Matrix f(n_, keep);
  Index at = 0;
  // Eigenvalues come ascending; store largest first.
  for (Index i = s.size() - 1; i >= 0; --i) {
    if (s(i) > cutoff) f.col(at++) = std::sqrt(s(i)) * (q * es.eigenvectors().col(i));
  }
  factor_ = std::move(f);
  compressed_rank_ = keep;
}

Matrix LisAccumulator::average() const {
  if (count_ == 0) return Matrix::Zero(n_, n_);
  Matrix s = factor_ * factor_.transpose() / static_cast<double>(count_);
  return 0.5 * (s + s.transpose());
}

TruncatedEig LisAccumulator::eigen(double threshold) const {
  if (count_ == 0) throw Error(ErrorKind::InvalidArgument, "accumulator holds no packets");
  if (factor_.cols() == 0) return TruncatedEig{Vector(0), Matrix(n_, 0)};
  const auto [q, g] = reduce_factor(factor_);
  TruncatedEig small = truncated_eig_dense(g / static_cast<double>(count_), threshold, g.rows());
  Matrix vectors = q * small.vectors;
  canonicalize_signs(vectors);
  return TruncatedEig{std::move(small.values), std::move(vectors)};
}

LisAccumulator accumulate(LisAccumulator acc, const EigenPacket& packet) {
  acc.add(packet);
  return acc;
}

Matrix GlobalLis::projector() const { return phi * xi.transpose(); }

GlobalLis make_global_lis(const GaussianPrior& prior, Matrix psi, Vector gamma,
                          Index sample_count, bool reorthonormalize) {
  if (psi.rows() != prior.dim() || psi.cols() != gamma.size()) {
    throw Error(ErrorKind::DimensionMismatch, "LIS basis does not match prior/eigenvalues");
  }
  if (reorthonormalize && psi.cols() > 0) modified_gram_schmidt(psi);
  GlobalLis lis;
  lis.phi = prior.factor().color(psi);
  lis.xi = prior.factor().transpose_solve(psi);
  lis.psi = std::move(psi);
  lis.gamma = std::move(gamma);
  lis.sample_count = sample_count;
  return lis;
}

GlobalLis global_lis(const LisAccumulator& acc, const GaussianPrior& prior, double tau_g) {
  if (acc.dim() != prior.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "accumulator and prior dimensions differ");
  }
  TruncatedEig eig = acc.eigen(tau_g);
  return make_global_lis(prior, std::move(eig.vectors), std::move(eig.values), acc.count());
}

LisCoordinates::LisCoordinates(const GlobalLis& lis, const GaussianPrior& prior) : lis_(lis) {
  const Index n = lis.dim();
  const Index r = lis.rank();
  if (prior.dim() != n) throw Error(ErrorKind::DimensionMismatch, "LisCoordinates: prior size");
  if (r == 0) {
    psi_perp_ = Matrix::Identity(n, n);
  } else {
    Eigen::HouseholderQR<Matrix> qr(lis.psi);
    const Matrix q = qr.householderQ();
    psi_perp_ = q.rightCols(n - r);
  }
  phi_perp_ = prior.factor().color(psi_perp_);
  xi_perp_ = prior.factor().transpose_solve(psi_perp_);
}

std::pair<Vector, Vector> LisCoordinates::project(const Vector& x) const {
  if (x.size() != lis_.dim()) throw Error(ErrorKind::DimensionMismatch, "project");
  return {lis_.xi.transpose() * x, xi_perp_.transpose() * x};
}

Vector LisCoordinates::reconstruct(const Vector& x_r, const Vector& x_perp) const {
  if (x_r.size() != lis_.rank() || x_perp.size() != psi_perp_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "reconstruct");
  }
  return lis_.phi * x_r + phi_perp_ * x_perp;
}

FactoredPrior factor_prior(const GaussianPrior& prior, const GlobalLis& lis) {
  if (lis.dim() != prior.dim()) throw Error(ErrorKind::DimensionMismatch, "factor_prior");
  const LisCoordinates coords(lis, prior);
  auto [lis_mean, cs_mean] = coords.project(prior.mean());
  return FactoredPrior{std::move(lis_mean), std::move(cs_mean)};
}

ReducedPosterior::ReducedPosterior(ForwardProblem problem, GlobalLis lis)
    : problem_(std::move(problem)), lis_(std::move(lis)) {
  problem_.validate();
  if (lis_.dim() != problem_.param_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "LIS and problem dimensions differ");
  }
  const Vector& mu = problem_.prior->mean();
  prior_mean_ = lis_.xi.transpose() * mu;
  offset_ = mu - lis_.phi * prior_mean_;
}

Vector ReducedPosterior::to_full(const Vector& x_r) const {
  if (x_r.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "reduced state size");
  return lis_.phi * x_r + offset_;
}

Vector ReducedPosterior::to_reduced(const Vector& x) const { return lis_.xi.transpose() * x; }

TargetEval ReducedPosterior::evaluate(const Vector& x_r) const {
  const Vector x = to_full(x_r);
  const auto lin = problem_.model->linearize(x);
  const Vector res = lin->output() - problem_.data;
  TargetEval e;
  e.log_likelihood = -0.5 * problem_.noise.whiten(res).squaredNorm();
  const Vector centered = x_r - prior_mean_;
  e.log_density = e.log_likelihood - 0.5 * centered.squaredNorm();
  e.gradient = -(lis_.phi.transpose() * lin->jac_adjoint(problem_.noise.inverse_apply(res))) -
               centered;
  return e;
}

double ReducedPosterior::log_density(const Vector& x_r) const {
  const Vector x = to_full(x_r);
  return -misfit(problem_, x) - 0.5 * (x_r - prior_mean_).squaredNorm();
}

double reduced_log_posterior(const ForwardProblem& problem, const GlobalLis& lis,
                             const Vector& x_r) {
  return ReducedPosterior(problem, lis).log_density(x_r);
}

Vector reduced_grad_log_posterior(const ForwardProblem& problem, const GlobalLis& lis,
                                  const Vector& x_r) {
  return ReducedPosterior(problem, lis).evaluate(x_r).gradient;
}

LogTarget reduced_target(const ForwardProblem& problem, const GlobalLis& lis) {
  auto post = std::make_shared<const ReducedPosterior>(problem, lis);
  return [post](const Vector& x_r) { return post->evaluate(x_r); };
}

double weighted_subspace_distance(const GlobalLis& a, const GlobalLis& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "subspace dimensions differ");
  if (a.rank() == 0 || b.rank() == 0) return 1.0;
  const auto weights = [](const Vector& gamma) {
    const double total = gamma.sum();
    return Vector((gamma.array().max(0.0) / total).pow(0.25));
  };
  const Matrix pa = a.psi * weights(a.gamma).asDiagonal();
  const Matrix pb = b.psi * weights(b.gamma).asDiagonal();
  const double overlap = (pa.transpose() * pb).squaredNorm();
  return std::sqrt(std::max(0.0, 1.0 - overlap));
}

MalaConfig reduced_mala_config(const GlobalLis& lis, bool adapt_precond) {
  MalaConfig mc;
  mc.preconditioner = adapt_precond ? PreconditionerKind::Empirical : PreconditionerKind::Fixed;
  mc.precond_cov = (1.0 + lis.gamma.array()).inverse().matrix().asDiagonal();
  return mc;
}

AdaptResult adapt_lis(const ForwardProblem& problem, const AdaptConfig& config) {
  problem.validate();
  if (config.subchain_len < 1) throw Error(ErrorKind::InvalidArgument, "subchain_len must be >= 1");
  const double tau_g = config.tau_g > 0.0 ? config.tau_g : config.tau_loc;
  const GaussianPrior& prior = *problem.prior;
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return config.record_timing
               ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
               : 0.0;
  };

  AdaptResult out;
  out.map = map_point(problem, prior.mean(), config.map_tol, config.map_max_iters);
  if (!out.map.converged || !out.map.point.allFinite()) {
    throw Error(ErrorKind::MapNotFound,
                "MAP optimization did not converge (grad norm " +
                    std::to_string(out.map.grad_norm) + ")");
  }

  LisAccumulator acc(problem.param_dim());
  acc.add(local_lis(problem, out.map.point, config.tau_loc, config.max_rank,
                    iteration_seed(config.seed, kStreamEig, 0), config.eig));
  out.hessian_evals = 1;
  GlobalLis lis = global_lis(acc, prior, tau_g);

  ReducedPosterior post(problem, lis);
  Vector theta = post.to_reduced(out.map.point);
  double step = 0.0;
  Index adapt_count = 0;

  const auto budget_spent = [&] {
    return config.max_hessians > 0 && out.hessian_evals >= config.max_hessians;
  };
  if (budget_spent()) out.budget_exhausted = true;

  for (Index k = 1; k <= config.max_iters && !out.budget_exhausted; ++k) {
    AdaptTraceRow row;
    row.iter = k;
    Vector x_new;
    if (lis.rank() == 0) {
      // An empty LIS leaves the prior as the approximate posterior.
      x_new = prior.sample(iteration_seed(config.seed, kStreamChain, k), 1).col(0);
      row.loglik_lag1 = std::numeric_limits<double>::quiet_NaN();
    } else {
      MalaConfig mc = reduced_mala_config(lis, false);
      mc.step_size = step;
      mc.adapt_offset = adapt_count;
      mc.record_timing = false;
      const LogTarget target = [&post](const Vector& v) { return post.evaluate(v); };
      const Chain chain = run_mala(target, lis.rank(), mc, theta, config.subchain_len,
                                   iteration_seed(config.seed, kStreamChain, k));
      step = chain.final_step_size;
      adapt_count += chain.proposals;
      row.acceptance = chain.acceptance_rate();
      if (chain.steps() > 0) theta = chain.states.row(chain.steps() - 1).transpose();
      row.loglik_lag1 = std::numeric_limits<double>::quiet_NaN();
      if (chain.steps() > 2) {
        const std::vector<double> ll(chain.log_lik.data(), chain.log_lik.data() + chain.steps());
        row.loglik_lag1 = autocorrelation(ll, 1)(1);
      }
      x_new = post.to_full(theta);
    }

    if (config.conditional_update) {
      // Independence proposals from the complement prior, accepted on the
      // likelihood ratio.
      const std::uint64_t cs_seed = iteration_seed(config.seed, kStreamCs, k);
      const Matrix draws = prior.sample(cs_seed, config.conditional_steps);
      std::mt19937_64 rng(derive_seed(cs_seed, 1));
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      const Vector lis_part = lis.phi * (lis.xi.transpose() * x_new);
      double cur = -misfit(problem, x_new);
      for (Index j = 0; j < draws.cols(); ++j) {
        const Vector d = draws.col(j);
        const Vector cand = lis_part + d - lis.phi * (lis.xi.transpose() * d);
        const double next = -misfit(problem, cand);
        if (std::isfinite(next) && std::log(uniform(rng)) < next - cur) {
          x_new = cand;
          cur = next;
        }
      }
    }

    acc.add(local_lis(problem, x_new, config.tau_loc, config.max_rank,
                      iteration_seed(config.seed, kStreamEig, k), config.eig));
    ++out.hessian_evals;
    GlobalLis next = global_lis(acc, prior, tau_g);
    row.distance = weighted_subspace_distance(lis, next);
    lis = std::move(next);
    post = ReducedPosterior(problem, lis);
    theta = post.to_reduced(x_new);

    row.rank = lis.rank();
    row.hessian_evals = out.hessian_evals;
    row.gamma = lis.gamma;
    row.wall_time = elapsed();
    out.trace.push_back(std::move(row));

    if (out.trace.back().distance < config.dist_tol) {
      out.converged = true;
      break;
    }
    if (budget_spent()) out.budget_exhausted = true;
  }

  out.lis = std::move(lis);
  out.step_size = step;
  return out;
}

}  // namespace lisinfer
