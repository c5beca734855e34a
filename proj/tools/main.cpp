// bgdsa: design, simulate, and analyze broadcast-gossip stochastic
// approximation networks. Subcommands share one config file; --seed, --reps
// and --out override the corresponding config entries.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bgdsa/experiment.hpp"
#include "bgdsa/version.hpp"

namespace {

void add_common(CLI::App* cmd, bgdsa::CommandOptions& options) {
  cmd->add_option("--config", options.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", options.seed, "master seed (overrides config)");
  cmd->add_option("--reps", options.reps, "replication count (overrides config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", options.out_dir, "output directory (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broadcast-gossip distributed stochastic approximation toolkit"};
  app.set_version_flag("--version", std::string(bgdsa::kVersion));
  app.require_subcommand(1);

  bgdsa::CommandOptions options;
  CLI::App* design = app.add_subcommand("design", "solve for network parameters");
  CLI::App* simulate = app.add_subcommand("simulate", "run replicated simulations");
  CLI::App* rate = app.add_subcommand("rate", "asymptotic covariance analysis");
  CLI::App* analyze = app.add_subcommand("analyze", "network and decay diagnostics");
  for (CLI::App* cmd : {design, simulate, rate, analyze}) add_common(cmd, options);

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) return bgdsa::cmd_design(options);
    if (simulate->parsed()) return bgdsa::cmd_simulate(options);
    if (rate->parsed()) return bgdsa::cmd_rate(options);
    return bgdsa::cmd_analyze(options);
  } catch (const std::exception& err) {
    std::cerr << "bgdsa: " << err.what() << "\n";
    return 2;
  }
}
