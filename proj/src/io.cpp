#include "lisinfer/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "lisinfer/error.hpp"

namespace lisinfer {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

using Magic = std::array<char, 4>;
constexpr Magic kMat = {'M', 'A', 'T', '1'};
constexpr Magic kChn = {'C', 'H', 'N', '1'};
constexpr Magic kLis = {'L', 'I', 'S', '1'};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  return in;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorKind::IoError, "truncated file " + path.string());
  }
  return v;
}

void put_rows(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Matrix get_rows(std::istream& in, Index rows, Index cols, const std::filesystem::path& path) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  if (!in.read(reinterpret_cast<char*>(rm.data()),
               static_cast<std::streamsize>(rm.size() * sizeof(double)))) {
    throw Error(ErrorKind::IoError, "truncated file " + path.string());
  }
  return rm;
}

void expect_magic(std::istream& in, const Magic& magic, const std::filesystem::path& path) {
  Magic got{};
  if (!in.read(got.data(), 4) || got != magic) {
    throw Error(ErrorKind::IoError,
                path.string() + " is not a " + std::string(magic.data(), 4) + " file");
  }
}

void expect_end(std::istream& in, const std::filesystem::path& path) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::IoError, "trailing bytes in " + path.string());
  }
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  out.write(kMat.data(), 4);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  put_rows(out, m);
  finish(out, path);
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, kMat, path);
  const auto rows = static_cast<Index>(get_u64(in, path));
  const auto cols = static_cast<Index>(get_u64(in, path));
  Matrix m = get_rows(in, rows, cols, path);
  expect_end(in, path);
  return m;
}

std::uint64_t hash_matrix(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t len = static_cast<std::size_t>(m.size()) * sizeof(double);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::filesystem::path chain_trace_path(const std::filesystem::path& chain_path) {
  return std::filesystem::path(chain_path.string() + ".trace");
}

void write_chain(const std::filesystem::path& path, const Chain& chain) {
  auto out = open_out(path);
  out.write(kChn.data(), 4);
  put_u64(out, static_cast<std::uint64_t>(chain.dim()));
  put_u64(out, static_cast<std::uint64_t>(chain.steps()));
  put_rows(out, chain.states);
  finish(out, path);

  const Index n = chain.steps();
  Matrix trace(n, 5);
  for (Index i = 0; i < n; ++i) {
    trace(i, 0) = chain.log_post(i);
    trace(i, 1) = chain.log_lik(i);
    trace(i, 2) = chain.accepted[static_cast<std::size_t>(i)];
    trace(i, 3) = chain.step_sizes(i);
    trace(i, 4) = chain.wall_times(i);
  }
  write_matrix(chain_trace_path(path), trace);
}

Chain read_chain(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, kChn, path);
  const auto dim = static_cast<Index>(get_u64(in, path));
  const auto steps = static_cast<Index>(get_u64(in, path));
  Chain chain;
  chain.states = get_rows(in, steps, dim, path);
  expect_end(in, path);

  const Matrix trace = read_matrix(chain_trace_path(path));
  if (trace.rows() != steps || trace.cols() != 5) {
    throw Error(ErrorKind::IoError, "chain trace does not match " + path.string());
  }
  chain.log_post = trace.col(0);
  chain.log_lik = trace.col(1);
  chain.accepted.resize(static_cast<std::size_t>(steps));
  for (Index i = 0; i < steps; ++i) {
    chain.accepted[static_cast<std::size_t>(i)] = trace(i, 2) != 0.0 ? 1 : 0;
  }
  chain.step_sizes = trace.col(3);
  chain.wall_times = trace.col(4);
  return chain;
}

void write_lis(const std::filesystem::path& path, const GlobalLis& lis,
               const GaussianPrior& prior) {
  if (lis.dim() != prior.dim()) throw Error(ErrorKind::DimensionMismatch, "write_lis");
  auto out = open_out(path);
  out.write(kLis.data(), 4);
  put_u64(out, static_cast<std::uint64_t>(lis.dim()));
  put_u64(out, static_cast<std::uint64_t>(lis.rank()));
  put_u64(out, static_cast<std::uint64_t>(lis.sample_count));
  put_rows(out, lis.psi);
  put_rows(out, lis.gamma);
  put_u64(out, hash_matrix(prior.mean()));
  put_u64(out, hash_matrix(prior.cov()));
  finish(out, path);
}

GlobalLis read_lis(const std::filesystem::path& path, const GaussianPrior& prior) {
  auto in = open_in(path);
  expect_magic(in, kLis, path);
  const auto n = static_cast<Index>(get_u64(in, path));
  const auto r = static_cast<Index>(get_u64(in, path));
  const auto m = static_cast<Index>(get_u64(in, path));
  Matrix psi = get_rows(in, n, r, path);
  Vector gamma = get_rows(in, r, 1, path).col(0);
  const std::uint64_t mean_hash = get_u64(in, path);
  const std::uint64_t cov_hash = get_u64(in, path);
  expect_end(in, path);
  if (n != prior.dim() || mean_hash != hash_matrix(prior.mean()) ||
      cov_hash != hash_matrix(prior.cov())) {
    throw Error(ErrorKind::ConfigError, path.string() + " was built for a different prior");
  }
  return make_global_lis(prior, std::move(psi), std::move(gamma), m, false);
}

}  // namespace lisinfer
