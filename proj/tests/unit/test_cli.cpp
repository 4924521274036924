#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "lisinfer/cli/commands.hpp"
#include "lisinfer/cli/config.hpp"
#include "lisinfer/error.hpp"
#include "lisinfer/io.hpp"

using namespace lisinfer;
using namespace lisinfer::cli;
using namespace testing;
namespace fs = std::filesystem;

namespace {

const char* kLinear = R"(
[problem]
kind = linear-test

[lis]
tau_loc = 1e-6
subchain_len = 20
max_iters = 3

[mcmc]
steps = 200
burn_in = 0.2
)";

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lisinfer_unit_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::string& cmd, const CommandArgs& args) {
  std::ostringstream out, err;
  const int code = run_command(cmd, args, out, err);
  return {code, out.str(), err.str()};
}

std::string resolved(const RunConfig& c) {
  std::ostringstream s;
  write_resolved(s, c);
  return s.str();
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("config parsing rejects unknown entries and bad values") {
  CHECK(kind_of("[problem]\nkind = linear-test\n[lis]\ntau = 1\n") == ErrorKind::ConfigError);
  CHECK(kind_of("[problem]\nkind = linear-test\n[nonsense]\na = 1\n") == ErrorKind::ConfigError);
  CHECK(kind_of("[problem]\nkind = plasma\n") == ErrorKind::ConfigError);
  CHECK(kind_of("[problem]\nkind = linear-test\n[mcmc]\nsteps = many\n") == ErrorKind::ConfigError);
  CHECK(kind_of("[problem]\nkind = linear-test\n[mcmc]\nburn_in = 1.5\n") == ErrorKind::ConfigError);
  CHECK(kind_of("[problem]\nkind = linear-test\n[prior]\ntensor = 1, 0, 0, 1\n") == ErrorKind::ConfigError);
  try {
    parse_config_text("[problem]\nkind = linear-test\n[lis]\ntau = 1\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
}

TEST_CASE("resolved config echoes every default and round-trips") {
  for (const char* kind : {"elliptic", "gomos", "linear-test"}) {
    const RunConfig c = parse_config_text(std::string("[problem]\nkind = ") + kind + "\n");
    const std::string text = resolved(c);
    CHECK(text.find("tau_loc") != std::string::npos);
    CHECK(text.find("target_accept") != std::string::npos);
    CHECK(resolved(parse_config_text(text)) == text);
  }
  const RunConfig c = parse_config_text(
      "[problem]\nkind = elliptic\n[prior]\nsigma = 2\ntensor = 1, 0.2, 0.2, 1\n[lis]\ndist_tol = inf\n");
  CHECK(c.elliptic.prior.sigma == 2.0);
  CHECK(c.elliptic.prior.tensor(0, 1) == 0.2);
  CHECK(std::isinf(c.lis.dist_tol));
  CHECK(resolved(parse_config_text(resolved(c))) == resolved(c));
}

TEST_CASE("build-lis, verify, sample, estimate, diagnose on the linear problem") {
  const fs::path dir = workdir("pipeline");
  CommandArgs a;
  a.config = write_config(dir, kLinear);
  a.out = dir / "lis";
  Result r = run("build-lis", a);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"lis.bin", "trace.csv", "eigenvalues.csv", "map.mat", "build_lis.json",
                        "config.resolved.ini"}) {
    CHECK(fs::exists(dir / "lis" / f));
  }
  std::ifstream trace(dir / "lis" / "trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header.rfind("iter,r,distance,hessian_evals,wall_time", 0) == 0);

  CommandArgs v = a;
  v.lis = dir / "lis" / "lis.bin";
  v.out = dir / "verify";
  r = run("verify", v);
  CHECK_MESSAGE(r.code == 0, r.out);
  CHECK(r.out.find("PASS lis.optimal_subspace_angle") != std::string::npos);

  CommandArgs s = v;
  s.out = dir / "sub";
  r = run("sample", s);
  REQUIRE(r.code == 0);
  const Chain sub = read_chain(dir / "sub" / "chain_0.chn");
  CHECK(sub.dim() == 6);
  CHECK(sub.steps() == 200);
  CHECK(fs::exists(dir / "sub" / "chain_0.json"));

  CommandArgs full = a;
  full.out = dir / "full";
  REQUIRE(run("sample", full).code == 0);
  CHECK(read_chain(dir / "full" / "chain_0.chn").dim() == 20);

  CommandArgs vc = v;
  vc.chains = {dir / "sub" / "chain_0.chn", dir / "full" / "chain_0.chn"};
  vc.out = dir / "verify2";
  r = run("verify", vc);
  CHECK_MESSAGE(r.code == 0, r.out);

  CommandArgs e = v;
  e.chains = {dir / "sub" / "chain_0.chn"};
  e.out = dir / "est";
  REQUIRE(run("estimate", e).code == 0);
  CHECK(read_matrix(dir / "est" / "mean.mat").rows() == 20);
  CHECK(read_matrix(dir / "est" / "cov.mat").rows() == 20);
  CHECK(fs::exists(dir / "est" / "fields.json"));

  CommandArgs d = vc;
  d.out = dir / "diag";
  r = run("diagnose", d);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::ifstream ess(dir / "diag" / "ess.csv");
  std::getline(ess, header);
  CHECK(header == "chain,series,samples,iat,ess,ess_per_step,ess_per_second");
  std::ifstream ac(dir / "diag" / "autocorr.csv");
  std::getline(ac, header);
  CHECK(header ==
        "lag,chain0:loglik,chain0:lis1,chain0:lis3,chain0:lis5,chain1:loglik,chain1:lis1,"
        "chain1:lis3,chain1:lis5");
}

TEST_CASE("dist_tol = inf stops after one iteration") {
  const fs::path dir = workdir("inf");
  CommandArgs a;
  a.config = write_config(dir, R"(
[problem]
kind = linear-test
[lis]
tau_loc = 1e-6
max_iters = 50
dist_tol = inf
)");
  a.out = dir;
  REQUIRE(run("build-lis", a).code == 0);
  std::ifstream trace(dir / "trace.csv");
  std::string line;
  int lines = 0;
  while (std::getline(trace, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("exit codes") {
  const fs::path dir = workdir("codes");
  CommandArgs a;
  a.config = write_config(dir, "[problem]\nkind = linear-test\n[bogus]\nx = 1\n");
  a.out = dir;
  Result r = run("build-lis", a);
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("bogus") != std::string::npos);

  a.config = write_config(dir, "[problem]\nkind = linear-test\n[mcmc]\nsteps = 0\n");
  r = run("sample", a);
  CHECK(r.code == 0);
  CHECK(read_chain(dir / "chain_0.chn").steps() == 0);

  CommandArgs e = a;
  e.chains = {dir / "no_such.chn"};
  r = run("estimate", e);
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("no_such.chn") != std::string::npos);

  a.config = write_config(dir, "[problem]\nkind = linear-test\n[mcmc]\nsteps = 1\nburn_in = 0\n");
  REQUIRE(run("sample", a).code == 0);
  CommandArgs d = a;
  d.chains = {dir / "chain_0.chn"};
  r = run("diagnose", d);
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("SeriesTooShort") != std::string::npos);

  CHECK(run("unknown", a).code == kExitUsage);
}

TEST_CASE("seed override changes the chain, identical inputs give identical files") {
  const fs::path dir = workdir("seeds");
  CommandArgs a;
  a.config = write_config(dir, "[problem]\nkind = linear-test\n[mcmc]\nsteps = 50\nchains = 2\n");
  a.out = dir / "a";
  REQUIRE(run("sample", a).code == 0);
  const Chain first = read_chain(dir / "a" / "chain_0.chn");
  const Chain second = read_chain(dir / "a" / "chain_1.chn");
  CHECK((first.states - second.states).norm() > 0.0);
  REQUIRE(run("sample", a).code == 0);
  CHECK((read_chain(dir / "a" / "chain_0.chn").states - first.states).norm() == 0.0);
  a.seed = 99;
  REQUIRE(run("sample", a).code == 0);
  CHECK((read_chain(dir / "a" / "chain_0.chn").states - first.states).norm() > 0.0);
}

TEST_CASE("linear-test RB mean agrees with the exact posterior mean") {
  const fs::path dir = workdir("oracle");
  CommandArgs a;
  a.config = write_config(dir, R"(
[problem]
kind = linear-test
[linear]
nonzero_mean = true
[lis]
tau_loc = 1e-6
max_iters = 2
[mcmc]
steps = 40000
burn_in = 0.1
)");
  a.out = dir / "lis";
  REQUIRE(run("build-lis", a).code == 0);
  CommandArgs s = a;
  s.lis = dir / "lis" / "lis.bin";
  s.out = dir / "chain";
  REQUIRE(run("sample", s).code == 0);
  CommandArgs e = s;
  e.chains = {dir / "chain" / "chain_0.chn"};
  e.out = dir / "est";
  REQUIRE(run("estimate", e).code == 0);

  const RunConfig c = parse_config(a.config);
  const BuiltProblem b = build_problem(c);
  const auto [mean, cov] = info_posterior(b.forward, b.problem.prior->cov(), b.problem.prior->mean(),
                                          b.problem.noise.covariance(), b.problem.data);
  const Vector est = read_matrix(dir / "est" / "mean.mat").col(0);
  const Vector sd = cov.diagonal().cwiseSqrt();
  CHECK(((est - mean).array() / sd.array()).abs().maxCoeff() < 0.1);
  const Vector var = read_matrix(dir / "est" / "variance.mat").col(0);
  CHECK(((var.array() / cov.diagonal().array()) - 1.0).abs().maxCoeff() < 0.1);
}
