#include <iostream>

#include <CLI11.hpp>

#include "mvclt_cli/commands.hpp"

int main(int argc, char** argv) {
  using mvclt::cli::CliOptions;
  CLI::App app{"Explicit multivariate normal approximation bounds for functionals of independent variables"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string config, mode, out, svg;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for Monte Carlo streams (overrides the config)");
    sub->add_option("--mode", mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    sub->add_option("--out", out, "CSV output path (default: stdout)");
    sub->add_flag("--reproducible", opts.reproducible, "omit the timestamp header line");
    sub->add_flag("--strict", opts.strict, "exit 3 when a hypothesis of a bound is violated");
  };
  auto* ids = app.add_subcommand("check-identities", "difference-operator identity and inequality suite");
  auto* bound = app.add_subcommand("bound", "bound reports with the discrepancy they bound");
  auto* sweep = app.add_subcommand("sweep", "bound totals along a family indexed by n");
  auto* runs = app.add_subcommand("compare-runs", "Bernoulli runs bound against the two closed-form constants");
  for (auto* sub : {ids, bound, sweep, runs}) add_common(sub);
  sweep->add_option("--svg", svg, "write a log-log plot of the totals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mvclt::cli::kConfigError;
  }

  for (auto* sub : app.get_subcommands()) opts.command = sub->get_name();
  if (!config.empty()) opts.config_path = config;
  if (!mode.empty()) opts.mode = mode;
  if (!out.empty()) opts.out = out;
  if (!svg.empty()) opts.svg = svg;
  for (auto* sub : app.get_subcommands())
    if (sub->count("--seed")) opts.seed = seed;

  try {
    return mvclt::cli::run(opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mvclt::cli::kCheckFailure;
  }
}
