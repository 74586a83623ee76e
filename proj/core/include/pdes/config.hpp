#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdes/dynamics.hpp"
#include "pdes/graph.hpp"
#include "pdes/problem.hpp"

namespace pdes {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A standing assumption of the method is violated by the configured
/// problem (1: nonempty feasible intersection, 2: connected graph).
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(int which, const std::string& msg)
      : std::runtime_error(msg), which_(which) {}
  int which() const { return which_; }

 private:
  int which_;
};

struct ScheduleSpec {
  std::string family;  // "power" | "constant"
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;
};

struct AgentSpec {
  double p = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Flat key = value experiment description. Graph edges are 1-indexed
/// (i, j, weight) triples; agents are (p, lower, upper) triples defining N.
struct ExperimentConfig {
  std::string problem = "lasso";   // "lasso" | "custom"
  std::string custom_name;         // registry key when problem = custom
  double lambda = 0.0;
  std::vector<AgentSpec> agents;
  std::vector<Edge> edges;         // 0-indexed after parsing

  Variant variant = Variant::plain;
  long iters = 0;
  ScheduleSpec alpha;
  ScheduleSpec eps;
  std::optional<double> norm_c;
  std::optional<int> norm_rounds;
  std::vector<double> x0;
  std::vector<double> v0;          // defaults to zeros
  std::optional<unsigned long> seed;  // reserved, parsed and unused
  std::string out;                 // trace path; defaults to <stem>.csv
};

/// Parses and validates a config file. Throws ConfigError on any syntactic
/// or structural problem (unknown key, duplicate scalar key, missing
/// required key, size mismatch, bad number).
ExperimentConfig load_config(const std::string& path);

ProblemInstance build_problem(const ExperimentConfig& cfg);
CommGraph build_graph(const ExperimentConfig& cfg, int node_count);
Schedule build_schedule(const ScheduleSpec& spec);

/// x0 (required) and v0 (zeros when absent) as N-by-d matrices; throws
/// ConfigError when list lengths do not match the problem shape.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_initial_state(
    const ExperimentConfig& cfg, const ProblemInstance& prob);

/// Assumption 1, nonempty feasible intersection: decided straight from the
/// config for the built-in problem, before any construction. Throws
/// AssumptionError(1).
void check_feasibility_assumption(const ExperimentConfig& cfg);

/// Assumption 2, connected communication graph. Throws AssumptionError(2).
void check_connectivity_assumption(const CommGraph& g);

}  // namespace pdes
