#include "lisinfer/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lisinfer/error.hpp"

namespace lisinfer::cli {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, where + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    bad(where, "expected a number, got '" + text + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    bad(where, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  bad(where, "expected true or false, got '" + text + "'");
}

Vector parse_list(const std::string& where, const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(parse_double(where, item));
  if (vals.empty()) bad(where, "expected a comma-separated list");
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

std::string fmt(double v) { return format_number(v); }

std::string fmt(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt(v(i));
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_precond(PrecondChoice p) {
  switch (p) {
    case PrecondChoice::Auto: return "auto";
    case PrecondChoice::Identity: return "identity";
    case PrecondChoice::Hessian: return "hessian";
    case PrecondChoice::Empirical: return "empirical";
  }
  return "auto";
}

PrecondChoice parse_precond(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  for (const auto p : {PrecondChoice::Auto, PrecondChoice::Identity, PrecondChoice::Hessian,
                       PrecondChoice::Empirical}) {
    if (t == fmt_precond(p)) return p;
  }
  bad(where, "preconditioner must be auto, identity, hessian or empirical");
}

ProblemKind parse_kind(const std::string& where, const std::string& text) {
  const std::string t = trim(text);
  if (t == "elliptic") return ProblemKind::Elliptic;
  if (t == "gomos") return ProblemKind::Gomos;
  if (t == "linear-test") return ProblemKind::LinearTest;
  bad(where, "kind must be elliptic, gomos or linear-test");
}

using Setter = std::function<void(RunConfig&, const std::string& where, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

struct Section {
  std::string name;
  /// Kinds for which the section is echoed; empty means always.
  std::set<ProblemKind> kinds;
  std::vector<Field> fields;
};

#define LIS_DOUBLE(path)                                                                    \
  [](RunConfig& c, const std::string& w, const std::string& s) { c.path = parse_double(w, s); }, \
      [](const RunConfig& c) { return fmt(c.path); }
#define LIS_INDEX(path)                                                                        \
  [](RunConfig& c, const std::string& w, const std::string& s) { c.path = parse_int<Index>(w, s); }, \
      [](const RunConfig& c) { return std::to_string(c.path); }
#define LIS_SEED(path)                                                                      \
  [](RunConfig& c, const std::string& w, const std::string& s) {                            \
    c.path = parse_int<std::uint64_t>(w, s);                                                \
  },                                                                                        \
      [](const RunConfig& c) { return std::to_string(c.path); }
#define LIS_BOOL(path)                                                                    \
  [](RunConfig& c, const std::string& w, const std::string& s) { c.path = parse_bool(w, s); }, \
      [](const RunConfig& c) { return fmt_bool(c.path); }
#define LIS_LIST(path)                                                                    \
  [](RunConfig& c, const std::string& w, const std::string& s) { c.path = parse_list(w, s); }, \
      [](const RunConfig& c) { return fmt(c.path); }

// The [prior] keys map onto the model-specific prior settings.
Section prior_section() {
  Section s{"prior", {}, {}};
  s.fields.push_back(
      {"sigma",
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const Vector list = parse_list(w, v);
         if (c.kind == ProblemKind::Gomos) {
           c.gomos.prior.sigma = list;
         } else {
           if (list.size() != 1) bad(w, "expected a single value");
           if (c.kind == ProblemKind::Elliptic) c.elliptic.prior.sigma = list(0);
           else c.linear.prior_sigma = list(0);
         }
       },
       [](const RunConfig& c) {
         if (c.kind == ProblemKind::Gomos) return fmt(c.gomos.prior.sigma);
         return fmt(c.kind == ProblemKind::Elliptic ? c.elliptic.prior.sigma : c.linear.prior_sigma);
       }});
  s.fields.push_back(
      {"corr_len",
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const double x = parse_double(w, v);
         if (c.kind == ProblemKind::Gomos) c.gomos.prior.corr_len = x;
         else if (c.kind == ProblemKind::Elliptic) c.elliptic.prior.corr_len = x;
         else c.linear.corr_len = x;
       },
       [](const RunConfig& c) {
         if (c.kind == ProblemKind::Gomos) return fmt(c.gomos.prior.corr_len);
         return fmt(c.kind == ProblemKind::Elliptic ? c.elliptic.prior.corr_len : c.linear.corr_len);
       }});
  s.fields.push_back(
      {"tensor",
       [](RunConfig& c, const std::string& w, const std::string& v) {
         if (c.kind != ProblemKind::Elliptic) bad(w, "only the elliptic prior takes a tensor");
         const Vector t = parse_list(w, v);
         if (t.size() != 4) bad(w, "tensor needs 4 entries (row-major 2x2)");
         c.elliptic.prior.tensor << t(0), t(1), t(2), t(3);
       },
       [](const RunConfig& c) -> std::string {
         if (c.kind != ProblemKind::Elliptic) return "";
         const auto& t = c.elliptic.prior.tensor;
         return fmt(Vector((Vector(4) << t(0, 0), t(0, 1), t(1, 0), t(1, 1)).finished()));
       }});
  s.fields.push_back(
      {"mean",
       [](RunConfig& c, const std::string& w, const std::string& v) {
         if (c.kind != ProblemKind::Gomos) bad(w, "only the gomos prior takes a per-gas mean");
         c.gomos.prior.mean = parse_list(w, v);
       },
       [](const RunConfig& c) -> std::string {
         if (c.kind != ProblemKind::Gomos) return "";
         if (c.gomos.prior.mean.size() > 0) return fmt(c.gomos.prior.mean);
         const auto& g = c.gomos;
         const double z_mid = 0.5 * (g.model.z_bottom + g.model.z_top);
         return fmt(Vector(g.base_log_density.array() -
                           (z_mid - g.model.z_bottom) / g.scale_height));
       }});
  return s;
}

const std::vector<Section>& schema() {
  static const std::vector<Section> sections = [] {
    std::vector<Section> s;
    s.push_back({"problem",
                 {},
                 {{"kind",
                   [](RunConfig& c, const std::string& w, const std::string& v) {
                     c.kind = parse_kind(w, v);
                   },
                   [](const RunConfig& c) { return to_string(c.kind); }}}});
    s.push_back({"elliptic",
                 {ProblemKind::Elliptic},
                 {{"nx", LIS_INDEX(elliptic.nx)},
                  {"ny", LIS_INDEX(elliptic.ny)},
                  {"truth_nx", LIS_INDEX(elliptic.truth_nx)},
                  {"truth_ny", LIS_INDEX(elliptic.truth_ny)},
                  {"snr", LIS_DOUBLE(elliptic.snr)},
                  {"truth_seed", LIS_SEED(elliptic.truth_seed)},
                  {"noise_seed", LIS_SEED(elliptic.noise_seed)}}});
    s.push_back({"gomos",
                 {ProblemKind::Gomos},
                 {{"n_gas", LIS_INDEX(gomos.model.n_gas)},
                  {"n_alts", LIS_INDEX(gomos.model.n_alts)},
                  {"n_lambda", LIS_INDEX(gomos.model.n_lambda)},
                  {"earth_radius", LIS_DOUBLE(gomos.model.earth_radius)},
                  {"z_bottom", LIS_DOUBLE(gomos.model.z_bottom)},
                  {"z_top", LIS_DOUBLE(gomos.model.z_top)},
                  {"gas_strength", LIS_LIST(gomos.model.gas_strength)},
                  {"bumps_per_gas", LIS_INDEX(gomos.model.bumps_per_gas)},
                  {"cross_section_seed", LIS_SEED(gomos.model.cross_section_seed)},
                  {"base_log_density", LIS_LIST(gomos.base_log_density)},
                  {"scale_height", LIS_DOUBLE(gomos.scale_height)},
                  {"snr", LIS_DOUBLE(gomos.snr)},
                  {"noise_seed", LIS_SEED(gomos.noise_seed)}}});
    s.push_back({"linear",
                 {ProblemKind::LinearTest},
                 {{"n", LIS_INDEX(linear.n)},
                  {"d", LIS_INDEX(linear.d)},
                  {"noise_sigma", LIS_DOUBLE(linear.noise_sigma)},
                  {"nonzero_mean", LIS_BOOL(linear.nonzero_mean)},
                  {"seed", LIS_SEED(linear.seed)}}});
    s.push_back(prior_section());
    s.push_back({"lis",
                 {},
                 {{"tau_loc", LIS_DOUBLE(lis.tau_loc)},
                  {"tau_g", LIS_DOUBLE(lis.tau_g)},
                  {"subchain_len", LIS_INDEX(lis.subchain_len)},
                  {"max_iters", LIS_INDEX(lis.max_iters)},
                  {"dist_tol", LIS_DOUBLE(lis.dist_tol)},
                  {"max_hessians", LIS_INDEX(lis.max_hessians)},
                  {"max_rank", LIS_INDEX(lis.max_rank)},
                  {"conditional_update", LIS_BOOL(lis.conditional_update)},
                  {"conditional_steps", LIS_INDEX(lis.conditional_steps)},
                  {"oversample", LIS_INDEX(lis.oversample)},
                  {"power_iterations", LIS_INDEX(lis.power_iterations)},
                  {"map_tol", LIS_DOUBLE(lis.map_tol)},
                  {"map_max_iters", LIS_INDEX(lis.map_max_iters)}}});
    s.push_back({"mcmc",
                 {},
                 {{"steps", LIS_INDEX(mcmc.steps)},
                  {"chains", LIS_INDEX(mcmc.chains)},
                  {"thin", LIS_INDEX(mcmc.thin)},
                  {"burn_in", LIS_DOUBLE(mcmc.burn_in)},
                  {"step_size", LIS_DOUBLE(mcmc.step_size)},
                  {"adapt", LIS_BOOL(mcmc.adapt)},
                  {"target_accept", LIS_DOUBLE(mcmc.target_accept)},
                  {"adapt_decay", LIS_DOUBLE(mcmc.adapt_decay)},
                  {"preconditioner",
                   [](RunConfig& c, const std::string& w, const std::string& v) {
                     c.mcmc.preconditioner = parse_precond(w, v);
                   },
                   [](const RunConfig& c) { return fmt_precond(c.mcmc.preconditioner); }},
                  {"refactor_every", LIS_INDEX(mcmc.refactor_every)},
                  {"jitter", LIS_DOUBLE(mcmc.jitter)},
                  {"max_lag", LIS_INDEX(mcmc.max_lag)}}});
    s.push_back({"seeds", {}, {{"base", LIS_SEED(seed)}}});
    s.push_back({"output",
                 {},
                 {{"dir",
                   [](RunConfig& c, const std::string&, const std::string& v) {
                     c.output_dir = trim(v);
                   },
                   [](const RunConfig& c) { return c.output_dir.string(); }},
                  {"record_timing", LIS_BOOL(record_timing)}}});
    return s;
  }();
  return sections;
}

#undef LIS_DOUBLE
#undef LIS_INDEX
#undef LIS_SEED
#undef LIS_BOOL
#undef LIS_LIST

void validate(const RunConfig& c) {
  const auto req = [](bool ok, const std::string& what) {
    if (!ok) bad("config", what);
  };
  req(c.lis.tau_loc > 0.0, "lis.tau_loc must be > 0");
  req(c.lis.subchain_len >= 1, "lis.subchain_len must be >= 1");
  req(c.lis.max_iters >= 0, "lis.max_iters must be >= 0");
  req(c.lis.dist_tol >= 0.0, "lis.dist_tol must be >= 0");
  req(c.lis.oversample >= 0, "lis.oversample must be >= 0");
  req(c.lis.power_iterations >= 0, "lis.power_iterations must be >= 0");
  req(c.lis.conditional_steps >= 1, "lis.conditional_steps must be >= 1");
  req(c.lis.map_max_iters >= 1, "lis.map_max_iters must be >= 1");
  req(c.mcmc.steps >= 0, "mcmc.steps must be >= 0");
  req(c.mcmc.chains >= 1, "mcmc.chains must be >= 1");
  req(c.mcmc.thin >= 1, "mcmc.thin must be >= 1");
  req(c.mcmc.burn_in >= 0.0 && c.mcmc.burn_in < 1.0, "mcmc.burn_in must lie in [0, 1)");
  req(c.mcmc.target_accept > 0.0 && c.mcmc.target_accept < 1.0,
      "mcmc.target_accept must lie in (0, 1)");
  req(c.mcmc.adapt_decay > 0.0 && c.mcmc.adapt_decay <= 1.0, "mcmc.adapt_decay must lie in (0, 1]");
  req(c.mcmc.refactor_every >= 1, "mcmc.refactor_every must be >= 1");
  req(c.mcmc.max_lag >= 1, "mcmc.max_lag must be >= 1");
  switch (c.kind) {
    case ProblemKind::Elliptic:
      req(c.elliptic.nx >= 1 && c.elliptic.ny >= 1, "elliptic mesh must be nonempty");
      req(c.elliptic.truth_nx >= 1 && c.elliptic.truth_ny >= 1, "truth mesh must be nonempty");
      req(c.elliptic.snr > 0.0, "elliptic.snr must be > 0");
      break;
    case ProblemKind::Gomos: {
      const auto& g = c.gomos;
      req(g.model.n_gas >= 1 && g.model.n_alts >= 1 && g.model.n_lambda >= 1,
          "gomos sizes must be >= 1");
      req(g.model.gas_strength.size() == g.model.n_gas, "gomos.gas_strength needs n_gas entries");
      req(g.base_log_density.size() == g.model.n_gas, "gomos.base_log_density needs n_gas entries");
      req(g.prior.sigma.size() == g.model.n_gas, "prior.sigma needs n_gas entries");
      req(g.prior.mean.size() == 0 || g.prior.mean.size() == g.model.n_gas,
          "prior.mean needs n_gas entries");
      req(g.model.z_top > g.model.z_bottom, "gomos.z_top must exceed z_bottom");
      req(g.snr > 0.0 && g.scale_height > 0.0, "gomos.snr and scale_height must be > 0");
      break;
    }
    case ProblemKind::LinearTest:
      req(c.linear.n >= 1 && c.linear.d >= 1, "linear sizes must be >= 1");
      req(c.linear.noise_sigma > 0.0, "linear.noise_sigma must be > 0");
      break;
  }
}

RunConfig from_tree(const boost::property_tree::ptree& tree) {
  RunConfig c;
  std::map<std::string, const Section*> by_name;
  for (const auto& s : schema()) by_name[s.name] = &s;
  for (const auto& [name, sec] : tree) {
    if (!by_name.count(name)) bad("[" + name + "]", "unknown section");
    if (!sec.data().empty()) bad(name, "top-level keys are not allowed");
  }
  // [problem] first: the meaning of [prior] depends on the kind.
  std::vector<std::string> order = {"problem"};
  for (const auto& s : schema()) {
    if (s.name != "problem") order.push_back(s.name);
  }
  for (const auto& name : order) {
    const auto it = tree.find(name);
    if (it == tree.not_found()) continue;
    const Section& sec = *by_name.at(name);
    for (const auto& [key, node] : it->second) {
      const std::string where = name + "." + key;
      const Field* field = nullptr;
      for (const auto& f : sec.fields) {
        if (f.key == key) field = &f;
      }
      if (field == nullptr) bad(where, "unknown key");
      field->set(c, where, node.data());
    }
  }
  validate(c);
  return c;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Elliptic: return "elliptic";
    case ProblemKind::Gomos: return "gomos";
    case ProblemKind::LinearTest: return "linear-test";
  }
  return "linear-test";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RunConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    bad("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return from_tree(tree);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void write_resolved(std::ostream& out, const RunConfig& config) {
  bool first = true;
  for (const auto& sec : schema()) {
    if (!sec.kinds.empty() && !sec.kinds.count(config.kind)) continue;
    if (!first) out << "\n";
    first = false;
    out << "[" << sec.name << "]\n";
    for (const auto& f : sec.fields) {
      const std::string v = f.get(config);
      if (!v.empty()) out << f.key << " = " << v << "\n";
    }
  }
}

}  // namespace lisinfer::cli
