#include <CLI11.hpp>
#include <optional>
#include <string>

#include "pdes/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "pdes - projected primal-dual epsilon-subgradient consensus "
      "optimization simulator"};
  app.require_subcommand(1);

  pdes::cli::Options opts;
  std::string out;
  long iters = -1;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "override the output path");
    cmd->add_option("--iters", iters, "override the iteration count");
    cmd->add_flag("--quiet", opts.quiet, "suppress summary and notices");
  };

  std::string config_a, config_b;
  CLI::App* cmd_run = app.add_subcommand(
      "run", "run the configured experiment and write its CSV trace");
  cmd_run->add_option("config", config_a, "experiment config file")
      ->required();
  add_common(cmd_run);

  CLI::App* cmd_check = app.add_subcommand(
      "check", "report schedule validity, connectivity, diameter and the "
               "feasible set");
  cmd_check->add_option("config", config_a, "experiment config file")
      ->required();
  add_common(cmd_check);

  CLI::App* cmd_reference = app.add_subcommand(
      "reference", "print the centralized optimum and dual certificate");
  cmd_reference->add_option("config", config_a, "experiment config file")
      ->required();
  add_common(cmd_reference);

  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run two configurations on the same problem and join "
                 "their residuals");
  cmd_compare->add_option("config_a", config_a, "first config file")
      ->required();
  cmd_compare->add_option("config_b", config_b, "second config file")
      ->required();
  add_common(cmd_compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pdes::cli::kExitConfigError;
  }

  if (!out.empty()) opts.out = out;
  if (iters >= 0) opts.iters = iters;

  if (cmd_run->parsed()) return pdes::cli::cmd_run(config_a, opts);
  if (cmd_check->parsed()) return pdes::cli::cmd_check(config_a, opts);
  if (cmd_reference->parsed()) return pdes::cli::cmd_reference(config_a, opts);
  return pdes::cli::cmd_compare(config_a, config_b, opts);
}
