#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "lisinfer/error.hpp"
#include "lisinfer/linalg.hpp"

using namespace lisinfer;
using namespace testing;

TEST_CASE("sym_factor reconstructs an SPD matrix with a lower factor") {
  const Matrix cov = random_spd(12, 1);
  const SymFactor f = sym_factor(cov);
  CHECK(f.jitter == 0.0);
  CHECK(rel_err(f.reconstruct(), cov) < 1e-12);
  CHECK(f.L.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);

  const Matrix v = random_matrix(12, 3, 2);
  CHECK(rel_err(f.color(f.whiten(v)), v) < 1e-12);
  CHECK(rel_err(f.transpose_apply(f.transpose_solve(v)), v) < 1e-12);
  CHECK(rel_err(f.whiten(v), cov.llt().matrixL().solve(v)) < 1e-12);
}

TEST_CASE("sym_factor jitter rescues a PSD matrix and refuses an indefinite one") {
  const Matrix b = random_matrix(8, 3, 3);
  const Matrix psd = b * b.transpose();
  const SymFactor f = sym_factor(psd);
  CHECK(f.jitter > 0.0);
  CHECK(f.jitter <= 1e-8 * psd.trace() / 8 * (1 + 1e-12));

  Matrix indef = Matrix::Identity(4, 4);
  indef(3, 3) = -1.0;
  CHECK_THROWS_AS(sym_factor(indef), Error);
  try {
    sym_factor(indef);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }

  Matrix asym = random_spd(4, 4);
  asym(0, 1) += 0.1;
  try {
    sym_factor(asym);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSymmetric);
  }
}

TEST_CASE("truncated_eig_dense agrees with a full eigensolver") {
  const Matrix a = random_spd(10, 5, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const TruncatedEig t = truncated_eig_dense(a, 0.0, 4);
  REQUIRE(t.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(t.values(i) == doctest::Approx(es.eigenvalues()(9 - i)).epsilon(1e-12));
  CHECK((t.vectors.transpose() * t.vectors - Matrix::Identity(4, 4)).norm() < 1e-12);
  CHECK(rel_err(a * t.vectors, t.vectors * t.values.asDiagonal()) < 1e-10);

  const TruncatedEig thresh = truncated_eig_dense(a, es.eigenvalues()(7), 10);
  CHECK(thresh.size() == 3);
}

TEST_CASE("truncated_eig_matfree recovers a low-rank operator") {
  const Index n = 60;
  const Matrix u = random_matrix(n, 5, 6);
  Eigen::HouseholderQR<Matrix> qr(u);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, 5);
  const Vector vals = (Vector(5) << 50, 20, 5, 1, 0.2).finished();
  const Matrix a = q * vals.asDiagonal() * q.transpose();
  const BlockAction act = [&](const Matrix& v) { return Matrix(a * v); };

  const TruncatedEig t = truncated_eig_matfree(act, n, 0.5, n, 7);
  REQUIRE(t.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(t.values(i) == doctest::Approx(vals(i)).epsilon(1e-9));
  CHECK(max_principal_angle(t.vectors, q.leftCols(4)) < 1e-8);

  // Same seed, same output.
  const TruncatedEig again = truncated_eig_matfree(act, n, 0.5, n, 7);
  CHECK((again.vectors - t.vectors).norm() == 0.0);
}

TEST_CASE("probe_linearity flags a nonlinear action") {
  const BlockAction nonlinear = [](const Matrix& v) { return Matrix(v.array().square().matrix()); };
  try {
    probe_linearity(nonlinear, 5, 1);
    FAIL("expected ActionNotLinear");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ActionNotLinear);
  }
  const Matrix a = random_spd(5, 2);
  CHECK_NOTHROW(probe_linearity([&](const Matrix& v) { return Matrix(a * v); }, 5, 1));
}

TEST_CASE("modified_gram_schmidt orthonormalizes and keeps the span") {
  Matrix b = random_matrix(9, 4, 8);
  const Matrix orig = b;
  modified_gram_schmidt(b);
  CHECK((b.transpose() * b - Matrix::Identity(4, 4)).norm() < 1e-12);
  CHECK(max_principal_angle(b, orig) < 1e-10);
}

TEST_CASE("principal angles") {
  const Matrix a = random_matrix(7, 3, 9);
  CHECK(max_principal_angle(a, a * random_spd(3, 10)) < 1e-7);
  CHECK(max_principal_angle(a, random_matrix(7, 2, 11)) == doctest::Approx(std::numbers::pi / 2));

  Matrix e1 = Matrix::Zero(3, 1), rot = Matrix::Zero(3, 1);
  e1(0, 0) = 1;
  rot(0, 0) = std::cos(0.3);
  rot(1, 0) = std::sin(0.3);
  CHECK(max_principal_angle(e1, rot) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(principal_cosines(e1, rot)(0) == doctest::Approx(std::cos(0.3)));
}

TEST_CASE("canonicalize_signs makes the leading component positive") {
  Matrix v(3, 2);
  v << 0, -1, -2, 1, 1, 0;
  canonicalize_signs(v);
  CHECK(v(1, 0) > 0);
  CHECK(v(0, 1) > 0);
}

TEST_CASE("derive_seed gives distinct streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {0ULL, 1ULL, 2ULL})
    for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(base, s));
  CHECK(seen.size() == 300);
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}

TEST_CASE("gaussian_matrix moments") {
  const Matrix g = gaussian_matrix(200, 200, 3);
  CHECK(std::abs(g.mean()) < 0.01);
  CHECK(g.array().square().mean() == doctest::Approx(1.0).epsilon(0.02));
  CHECK((gaussian_matrix(3, 3, 3) - gaussian_matrix(3, 3, 3)).norm() == 0.0);
}
