#pragma once

#include <optional>
#include <string>

namespace pdes::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAssumptionViolated = 3;
inline constexpr int kExitReferenceFailed = 4;

struct Options {
  std::optional<std::string> out;
  std::optional<long> iters;
  bool quiet = false;
};

/// Runs the configured experiment, writes the CSV trace and prints a one
/// line summary (final residual, final consensus error, iterations, wall
/// time).
int cmd_run(const std::string& config_path, const Options& opts = {});

/// Prints schedule validity verdicts for both profiles, connectivity,
/// diameter, the minimal max-consensus round count, and the feasible
/// interval.
int cmd_check(const std::string& config_path, const Options& opts = {});

/// Prints the central optimum x*, f*, the mean-zero dual certificate v* and
/// the normal-cone multipliers.
int cmd_reference(const std::string& config_path, const Options& opts = {});

/// Runs two configurations sharing graph, problem and initial state, writes
/// both traces plus a joined residual CSV (k, residual_a, residual_b), and
/// prints the early-phase overshoot statistic for each.
int cmd_compare(const std::string& config_a, const std::string& config_b,
                const Options& opts = {});

}  // namespace pdes::cli
