#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace pdes {

/// Per-iteration diagnostics. x and v are N-by-d, one agent per row.
/// objective_gap, delta and residual are filled only when reference data
/// (central optimum / saddle point) is available.
struct TraceRecord {
  long k = 1;
  Eigen::MatrixXd x;
  Eigen::MatrixXd v;
  double consensus_error = 0.0;  // ||L x|| over the stacked vector
  std::optional<double> objective_gap;  // f(x) - f*
  std::optional<double> delta;
  std::optional<double> residual;
  double step_used = 0.0;
  double eps_used = 0.0;
};

/// Normalized distance from the consensus optimum:
///   ||x - x*|| / ||x1 - x*||   (stacked Euclidean norms).
/// Throws std::domain_error when x1 equals x_star.
double residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x1,
                const Eigen::MatrixXd& x_star);

/// Minimum of the delta diagnostic over the last tail_fraction of the trace.
/// tail_fraction in (0, 1]; throws when the tail is empty or a record in it
/// has no delta.
double tail_min_delta(const std::vector<TraceRecord>& trace,
                      double tail_fraction);

/// CSV persistence. Columns, in order:
///   k, x_1..x_N, v_1..v_N, consensus_error, objective_gap, delta,
///   residual, step_used, eps_used
/// For d > 1 each agent column splits into _c0.._c{d-1} suffixes. Numbers
/// are written with 17 significant digits so a read_csv round trip is
/// bit-exact; absent optional values serialize as empty cells.
void write_csv(const std::vector<TraceRecord>& trace, const std::string& path);
std::vector<TraceRecord> read_csv(const std::string& path);

}  // namespace pdes
