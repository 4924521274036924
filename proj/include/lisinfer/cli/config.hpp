#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lisinfer/lis.hpp"
#include "lisinfer/models/elliptic.hpp"
#include "lisinfer/models/gomos.hpp"
#include "lisinfer/models/linear_test.hpp"

namespace lisinfer::cli {

enum class ProblemKind { Elliptic, Gomos, LinearTest };

enum class PrecondChoice { Auto, Identity, Hessian, Empirical };

struct LisSection {
  double tau_loc = 0.1;
  double tau_g = 0.0;
  Index subchain_len = 200;
  Index max_iters = 200;
  double dist_tol = 1e-6;
  Index max_hessians = 0;
  Index max_rank = 0;
  bool conditional_update = false;
  Index conditional_steps = 10;
  Index oversample = 10;
  Index power_iterations = 2;
  double map_tol = 1e-8;
  Index map_max_iters = 200;
};

struct McmcSection {
  Index steps = 10000;
  Index chains = 1;
  Index thin = 1;
  double burn_in = 0.5;
  double step_size = 0.0;
  bool adapt = true;
  double target_accept = 0.574;
  double adapt_decay = 0.6;
  PrecondChoice preconditioner = PrecondChoice::Auto;
  Index refactor_every = 20;
  double jitter = 1e-8;
  Index max_lag = 100;
};

/// Everything a run needs; every field has a default and is echoed in the
/// resolved config.
struct RunConfig {
  ProblemKind kind = ProblemKind::LinearTest;
  EllipticProblemConfig elliptic;
  GomosProblemConfig gomos;
  LinearTestConfig linear;
  LisSection lis;
  McmcSection mcmc;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";
  bool record_timing = false;
};

/// Parses an INI file. Unknown sections or keys and malformed values raise
/// ConfigError naming the offending entry.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Fully resolved config in the same INI dialect; parse(write(c)) == c.
void write_resolved(std::ostream& out, const RunConfig& config);

std::string to_string(ProblemKind kind);

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_number(double v);

}  // namespace lisinfer::cli
