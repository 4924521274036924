#include <iostream>

#include <CLI11.hpp>

#include "lisinfer/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = lisinfer::cli;

  CLI::App app{"Likelihood-informed subspace inference driver"};
  app.require_subcommand(1);

  cli::CommandArgs args;
  std::string config;
  std::string lis;
  std::vector<std::string> chains;
  std::string out;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"build-lis", "Adaptively construct the global LIS"},
      {"sample", "Run full-space or subspace MALA chains"},
      {"estimate", "Posterior mean and variance fields from chains"},
      {"diagnose", "Autocorrelation and effective sample size tables"},
      {"verify", "Check a LIS file and chains against recomputation"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--lis", lis, "LIS file from build-lis");
    sub->add_option("--chain", chains, "Chain file (repeatable)")->take_all();
    sub->add_option("--out", out, "Output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "Base seed (overrides [seeds] base)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    args.config = config;
    if (!lis.empty()) args.lis = lis;
    for (const auto& c : chains) args.chains.emplace_back(c);
    if (!out.empty()) args.out = out;
    if (sub->count("--seed") > 0) args.seed = seed;
    return cli::run_command(sub->get_name(), args, std::cout, std::cerr);
  }
  return cli::kExitUsage;
}
