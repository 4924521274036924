#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lisinfer/lis.hpp"
#include "lisinfer/mcmc.hpp"

namespace lisinfer {

/// MAT1: magic "MAT1", uint64 rows, uint64 cols, row-major little-endian doubles.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// 64-bit FNV-1a over the raw bytes of a matrix (column-major storage).
std::uint64_t hash_matrix(const Matrix& m);

/// CHN1: magic "CHN1", uint64 dim, uint64 steps, row-major doubles. The
/// per-row trace (log_post, log_lik, accepted, step_size, wall_time) goes to
/// "<path>.trace" in MAT1 format.
void write_chain(const std::filesystem::path& path, const Chain& chain);
/// Restores states and the per-row trace; run statistics are left at zero.
Chain read_chain(const std::filesystem::path& path);
std::filesystem::path chain_trace_path(const std::filesystem::path& chain_path);

/// LIS1: magic "LIS1", uint64 n, r, m, row-major psi, gamma, uint64 hash of
/// mu_pr, uint64 hash of Gamma_pr.
void write_lis(const std::filesystem::path& path, const GlobalLis& lis, const GaussianPrior& prior);
/// Reads a LIS file and rebuilds phi and xi from the prior. Throws
/// ConfigError when the file was built for a different prior.
GlobalLis read_lis(const std::filesystem::path& path, const GaussianPrior& prior);

}  // namespace lisinfer
