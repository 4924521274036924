#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lisinfer/error.hpp"
#include "lisinfer/models/elliptic.hpp"
#include "lisinfer/models/gomos.hpp"
#include "lisinfer/models/linear_test.hpp"
#include "lisinfer/models/synth.hpp"

using namespace lisinfer;
using namespace testing;

namespace {

// <J v, w> = <v, J^T w> and J v against central differences of G.
void check_derivatives(const ForwardModel& model, const Vector& x, unsigned seed) {
  const Index n = model.param_dim(), d = model.obs_dim();
  const Vector v = random_vector(n, seed), w = random_vector(d, seed + 1);
  const auto lin = model.linearize(x);
  const Vector jv = lin->jac_apply(v);
  const Vector jtw = lin->jac_adjoint(w);
  const double lhs = jv.dot(w), rhs = v.dot(jtw);
  CHECK(std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300) <= 1e-8);

  const double h = 1e-5;
  const Vector fd = (model.apply(x + h * v) - model.apply(x - h * v)) / (2 * h);
  CHECK(rel_err(jv, fd) <= 1e-5);
  CHECK(rel_err(lin->output(), model.apply(x)) < 1e-14);
}

}  // namespace

TEST_CASE("elliptic model: conservation and scaling") {
  const EllipticModel m(EllipticConfig::defaults(12, 4));
  CHECK(m.param_dim() == 48);
  CHECK(m.obs_dim() == 50);
  CHECK(m.load().sum() == doctest::Approx(0.0).scale(1.0));

  const Vector x = 0.3 * random_vector(48, 80);
  const Vector p = m.pressure(x);
  CHECK(std::abs(m.boundary_weights().dot(p)) < 1e-10);
  // Raising the log-permeability by c divides the pressure by e^c.
  const Vector p2 = m.pressure((x.array() + 0.7).matrix());
  CHECK(rel_err(p2, p * std::exp(-0.7)) < 1e-10);
  // The stiffness annihilates constants.
  const Vector ones = Vector::Ones(m.node_count());
  CHECK((m.stiffness(x) * ones).norm() < 1e-10);
  CHECK(rel_err(m.apply(x), m.observation() * p) < 1e-14);
}

TEST_CASE("elliptic derivatives at random points") {
  const EllipticModel m(EllipticConfig::defaults(12, 4));
  for (unsigned k = 0; k < 5; ++k) check_derivatives(m, random_vector(48, 90 + k), 200 + 2 * k);
}

TEST_CASE("gomos geometry by hand") {
  const Vector radii = (Vector(3) << 10.0, 11.0, 12.0).finished();
  const Vector tangent = (Vector(2) << 10.0, 11.0).finished();
  const Matrix a = gomos_geometry(radii, tangent);
  CHECK(a(0, 0) == doctest::Approx(2 * std::sqrt(121.0 - 100.0)));
  CHECK(a(0, 1) == doctest::Approx(2 * (std::sqrt(144.0 - 100.0) - std::sqrt(121.0 - 100.0))));
  CHECK(a(1, 0) == 0.0);
  CHECK(a(1, 1) == doctest::Approx(2 * std::sqrt(144.0 - 121.0)));
  // A ray never crosses shells below its tangent point.
  const GomosConfig cfg;
  const Matrix g = gomos_geometry(cfg.layer_radii());
  CHECK(g.rows() == 12);
  CHECK(g.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
  CHECK(g.diagonal().minCoeff() > 0.0);

  try {
    gomos_geometry((Vector(3) << 10.0, 9.0, 12.0).finished(), tangent);
    FAIL("expected RadiiNotAscending");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RadiiNotAscending);
  }
}

TEST_CASE("gomos forward model") {
  const GomosProblemConfig pc;
  const GomosProblem gp = make_gomos_problem(pc);
  const GomosModel& m = *gp.model;
  CHECK(m.param_dim() == 48);
  CHECK(m.obs_dim() == 360);
  const Vector t = m.apply(gp.truth);
  CHECK(t.maxCoeff() <= 1.0);
  CHECK(t.minCoeff() > 0.0);

  // By hand: T = exp(-C B^T A^T), vec column-major.
  const Matrix bt = m.densities_t(gp.truth);
  const Matrix tm = (-(m.cross_sections() * bt * m.geometry().transpose())).array().exp().matrix();
  CHECK(rel_err(t, Eigen::Map<const Vector>(tm.data(), tm.size())) < 1e-13);
  CHECK(bt(1, 3) == doctest::Approx(std::exp(gp.truth(1 * 12 + 3))));

  // Gas 4 barely moves the transmission.
  const auto lin = m.linearize(gp.truth);
  Vector e4 = Vector::Zero(48), e1 = Vector::Zero(48);
  e4(3 * 12 + 5) = 1.0;
  e1(0 * 12 + 5) = 1.0;
  CHECK(lin->jac_apply(e4).norm() < 1e-4 * lin->jac_apply(e1).norm());
}

TEST_CASE("gomos derivatives at random points") {
  const GomosProblem gp = make_gomos_problem(GomosProblemConfig{});
  for (unsigned k = 0; k < 5; ++k) {
    const Vector x = gp.truth + 0.3 * random_vector(48, 300 + k);
    check_derivatives(*gp.model, x, 400 + 2 * k);
  }
}

TEST_CASE("gomos prior is block diagonal over gases") {
  const GomosProblemConfig pc;
  const GomosProblem gp = make_gomos_problem(pc);
  const Matrix& c = gp.problem.prior->cov();
  CHECK(c.block(0, 12, 12, 12).norm() == 0.0);
  CHECK(c(0, 0) == doctest::Approx(5.22));
  CHECK(c(36, 36) == doctest::Approx(83.18));
}

TEST_CASE("synthetic data noise level") {
  const Matrix g = random_matrix(5, 3, 500);
  const LinearModel m(g);
  const Vector truth = random_vector(3, 501);
  const SynthData s = synth_data(m, truth, 10.0, 7);
  CHECK(s.sigma == doctest::Approx((g * truth).cwiseAbs().maxCoeff() / 10.0));
  CHECK(rel_err(s.clean, g * truth) < 1e-15);
  const SynthData exact = synth_data(m, truth, std::numeric_limits<double>::infinity(), 7);
  CHECK(exact.sigma == 0.0);
  CHECK((exact.data - exact.clean).norm() == 0.0);
  CHECK((synth_data(m, truth, 10.0, 7).data - s.data).norm() == 0.0);
}

TEST_CASE("linear test problem has a rank-d Hessian") {
  const LinearTestProblem lp = make_linear_test_problem(LinearTestConfig{});
  CHECK(lp.forward.rows() == 6);
  CHECK(lp.forward.cols() == 20);
  Eigen::JacobiSVD<Matrix> svd(lp.forward);
  CHECK(svd.rank() == 6);
  CHECK_NOTHROW(lp.problem.validate());
  LinearTestConfig nz;
  nz.nonzero_mean = true;
  CHECK(make_linear_test_problem(nz).problem.prior->mean().norm() > 1.0);
}

TEST_CASE("elliptic FEM converges at second order on a manufactured solution") {
  const double pi = std::acos(-1.0);
  auto exact = [pi](const GridPoint& s) { return std::cos(pi * s(0) / 3) * std::cos(pi * s(1)); };
  auto max_error = [&](Index nx, Index ny) {
    EllipticConfig cfg = EllipticConfig::defaults(nx, ny);
    cfg.source_fn = [&](const GridPoint& s) { return (pi * pi / 9 + pi * pi) * exact(s); };
    const EllipticModel m(cfg);
    const Vector p = m.pressure(Vector::Zero(m.param_dim()));
    double err = 0.0;
    for (Index k = 0; k < m.node_count(); ++k) err = std::max(err, std::abs(p(k) - exact(m.node(k))));
    return err;
  };
  const double e1 = max_error(12, 4), e2 = max_error(24, 8), e3 = max_error(48, 16);
  CHECK(e1 / e2 >= 3.0);
  CHECK(e1 / e2 <= 5.0);
  CHECK(e2 / e3 >= 3.0);
  CHECK(e2 / e3 <= 5.0);
}

TEST_CASE("gomos geometry rows telescope to the full chord") {
  const GomosConfig cfg;
  const Vector radii = cfg.layer_radii();
  const Matrix a = gomos_geometry(radii);
  const Index n = a.rows();
  const double r_max = radii(n);
  for (Index j = 0; j < n; ++j) {
    const double tangent = 0.5 * (radii(j) + radii(j + 1));
    CHECK(a.row(j).sum() == doctest::Approx(2 * std::sqrt(r_max * r_max - tangent * tangent)));
  }
  // One layer, ray tangent at the inner boundary.
  const Matrix single = gomos_geometry((Vector(2) << 6400.0, 6410.0).finished(),
                                       (Vector(1) << 6400.0).finished());
  CHECK(single(0, 0) == doctest::Approx(2 * std::sqrt(6410.0 * 6410.0 - 6400.0 * 6400.0)));
}

TEST_CASE("gomos geometry matches numerical ray integration") {
  const Vector radii = GomosConfig{}.layer_radii();
  const Index n = radii.size() - 1;
  const Matrix a = gomos_geometry(radii);
  const double r_max = radii(n);
  for (Index j = 0; j < n; j += 3) {
    const double r = 0.5 * (radii(j) + radii(j + 1));
    // Midpoint rule along the ray, binning each segment by its radius.
    const double half = std::sqrt(r_max * r_max - r * r);
    const int steps = 400000;
    const double dt = 2 * half / steps;
    Vector len = Vector::Zero(n);
    for (int k = 0; k < steps; ++k) {
      const double t = -half + (k + 0.5) * dt;
      const double rad = std::sqrt(r * r + t * t);
      for (Index i = 0; i < n; ++i) {
        if (rad >= radii(i) && rad < radii(i + 1)) {
          len(i) += dt;
          break;
        }
      }
    }
    CHECK((len - a.row(j).transpose()).cwiseAbs().maxCoeff() < 1e-2 * a.row(j).maxCoeff());
  }
}

TEST_CASE("gomos transmissions: empty atmosphere, monotonicity, zero direction") {
  const GomosProblem gp = make_gomos_problem(GomosProblemConfig{});
  const GomosModel& m = *gp.model;
  const Vector empty = m.apply(Vector::Constant(m.param_dim(), -1000.0));
  CHECK((empty.array() - 1.0).abs().maxCoeff() < 1e-15);
  // More absorber never raises any transmission.
  const Vector t0 = m.apply(gp.truth);
  for (Index i = 0; i < m.param_dim(); i += 7) {
    Vector x = gp.truth;
    x(i) += 0.5;
    CHECK((m.apply(x) - t0).maxCoeff() <= 0.0);
  }
  const auto lin = m.linearize(gp.truth);
  CHECK(lin->jac_apply(Vector::Zero(m.param_dim())).norm() == 0.0);
  CHECK(lin->jac_adjoint(Vector::Zero(m.obs_dim())).norm() == 0.0);
}
