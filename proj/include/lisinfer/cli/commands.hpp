#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lisinfer/cli/config.hpp"

namespace lisinfer::cli {

struct CommandArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> lis;
  std::vector<std::filesystem::path> chains;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand (build-lis, sample, estimate, diagnose, verify) and
/// maps library errors to exit codes. Messages go to err.
int run_command(const std::string& name, const CommandArgs& args, std::ostream& out,
                std::ostream& err);

/// Problem assembled from a resolved config.
struct BuiltProblem {
  ForwardProblem problem;
  /// Dense forward matrix for linear-test problems, empty otherwise.
  Matrix forward;
  /// Field shape for plotting: (rows, cols) of the parameter vector.
  Index shape_rows = 0;
  Index shape_cols = 0;
};

BuiltProblem build_problem(const RunConfig& config);

/// Derived seeds for the stages of a run.
std::uint64_t lis_seed(const RunConfig& config);
std::uint64_t chain_seed(const RunConfig& config, Index chain);

/// Concurrency cap from LISINFER_THREADS (default: hardware concurrency).
unsigned thread_cap();

}  // namespace lisinfer::cli
