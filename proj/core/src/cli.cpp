#include "pdes/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include "pdes/config.hpp"
#include "pdes/dynamics.hpp"
#include "pdes/graph.hpp"
#include "pdes/problem.hpp"
#include "pdes/reference.hpp"
#include "pdes/trace.hpp"

namespace pdes::cli {

namespace {

std::string num(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

struct LoadedExperiment {
  ExperimentConfig cfg;
  ProblemInstance prob;
  CommGraph graph;
  Eigen::MatrixXd x0, v0;
  Schedule alpha, eps;
  std::optional<NormalizationConfig> norm;
};

LoadedExperiment load_experiment(const std::string& path,
                                 const Options& opts) {
  ExperimentConfig cfg = load_config(path);
  if (opts.iters) {
    if (*opts.iters < 0) throw ConfigError("config: iters must be >= 0");
    cfg.iters = *opts.iters;
  }
  check_feasibility_assumption(cfg);
  ProblemInstance prob = build_problem(cfg);
  CommGraph graph = build_graph(cfg, prob.agent_count());
  auto [x0, v0] = build_initial_state(cfg, prob);
  Schedule alpha = build_schedule(cfg.alpha);
  Schedule eps = build_schedule(cfg.eps);
  std::optional<NormalizationConfig> norm;
  if (cfg.variant == Variant::normalized)
    norm = NormalizationConfig{*cfg.norm_c, *cfg.norm_rounds};
  return {std::move(cfg),  std::move(prob),  std::move(graph),
          std::move(x0),   std::move(v0),    std::move(alpha),
          std::move(eps),  std::move(norm)};
}

// Reference data is best-effort: traces stay unannotated for problems the
// centralized oracles cannot handle.
struct ReferenceData {
  std::optional<ScalarOptimum> optimum;
  std::optional<SaddleConstruction> saddle;
};

ReferenceData try_reference(const LoadedExperiment& exp) {
  ReferenceData ref;
  try {
    ref.optimum = solve_1d(exp.prob);
  } catch (const std::exception&) {
    return ref;
  }
  try {
    ref.saddle = solve_saddle(exp.graph, exp.prob);
  } catch (const std::exception&) {
  }
  return ref;
}

std::vector<TraceRecord> run_annotated(const LoadedExperiment& exp,
                                       const ReferenceData& ref,
                                       std::ostream* log) {
  std::vector<TraceRecord> trace =
      run(exp.graph, exp.prob, exp.alpha, exp.eps, exp.x0, exp.v0,
          exp.cfg.iters, exp.cfg.variant, exp.norm, log);
  if (ref.optimum) {
    const Eigen::MatrixXd x_star = Eigen::MatrixXd::Constant(
        exp.prob.agent_count(), 1, ref.optimum->x_star);
    annotate_trace(trace, exp.graph, exp.prob, x_star, ref.optimum->f_star,
                   ref.saddle ? &ref.saddle->point : nullptr);
  }
  return trace;
}

double overshoot_statistic(const std::vector<TraceRecord>& trace,
                           long max_k) {
  double peak = 0.0;
  for (const TraceRecord& rec : trace) {
    if (rec.k > max_k) break;
    peak = std::max(peak, rec.x.cwiseAbs().maxCoeff());
  }
  return peak;
}

int report_error(const std::exception& e, int code, bool quiet) {
  if (!quiet) std::cerr << "error: " << e.what() << "\n";
  return code;
}

}  // namespace

int cmd_run(const std::string& config_path, const Options& opts) {
  try {
    const LoadedExperiment exp = load_experiment(config_path, opts);
    check_connectivity_assumption(exp.graph);
    const ReferenceData ref = try_reference(exp);

    const auto started = std::chrono::steady_clock::now();
    const std::vector<TraceRecord> trace =
        run_annotated(exp, ref, opts.quiet ? nullptr : &std::cerr);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;

    const std::string out = opts.out.value_or(exp.cfg.out);
    write_csv(trace, out);

    if (!opts.quiet) {
      const TraceRecord& last = trace.back();
      std::cout << "final_residual="
                << (last.residual ? num(*last.residual) : "n/a")
                << " final_consensus_error=" << num(last.consensus_error)
                << " iterations=" << exp.cfg.iters
                << " wall_time_s=" << num(elapsed.count()) << "\n";
    }
    return kExitOk;
  } catch (const AssumptionError& e) {
    return report_error(e, kExitAssumptionViolated, opts.quiet);
  } catch (const ConfigError& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  } catch (const std::exception& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  }
}

int cmd_check(const std::string& config_path, const Options& opts) {
  try {
    // report-only: describe the config even when it violates an assumption
    const ExperimentConfig cfg = load_config(config_path);
    const Schedule alpha = build_schedule(cfg.alpha);
    const Schedule eps = build_schedule(cfg.eps);

    std::vector<Interval> bounds;
    int node_count = 0;
    if (cfg.problem == "lasso") {
      for (const AgentSpec& a : cfg.agents)
        bounds.push_back(Interval(a.lower, a.upper));
      node_count = static_cast<int>(cfg.agents.size());
    } else {
      const ProblemInstance prob = build_problem(cfg);
      node_count = prob.agent_count();
      if (const auto b = prob.interval_bounds()) bounds = *b;
    }
    const CommGraph graph = build_graph(cfg, node_count);

    const auto verdict = [](const ScheduleCheck& c) {
      switch (c.verdict) {
        case Verdict::valid:
          return std::string("valid");
        case Verdict::invalid:
          return "invalid (" + c.reason + ")";
        case Verdict::undecidable:
          return "undecidable (" + c.reason + ")";
      }
      return std::string("undecidable");
    };
    std::cout << "theorem1: "
              << verdict(check_schedule(alpha, eps, ScheduleMode::theorem1))
              << "\n";
    std::cout << "theorem2: "
              << verdict(check_schedule(alpha, eps, ScheduleMode::theorem2))
              << "\n";

    const bool connected = is_connected(graph);
    std::cout << "connectivity: " << (connected ? "connected" : "disconnected")
              << "\n";
    if (connected) {
      const int diam = diameter(graph);
      std::cout << "diameter: " << diam << "\n";
      std::cout << "min D: " << diam + 1 << "\n";
    } else {
      std::cout << "diameter: undefined\n";
      std::cout << "min D: undefined\n";
    }

    if (!bounds.empty()) {
      if (const auto feasible = intersect(bounds))
        std::cout << "X = [" << num(feasible->lower) << ", "
                  << num(feasible->upper) << "]\n";
      else
        std::cout << "X = empty\n";
    } else {
      std::cout << "X = (not interval-based)\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  }
}

int cmd_reference(const std::string& config_path, const Options& opts) {
  std::optional<LoadedExperiment> exp;
  try {
    exp = load_experiment(config_path, opts);
    check_connectivity_assumption(exp->graph);
  } catch (const AssumptionError& e) {
    return report_error(e, kExitAssumptionViolated, opts.quiet);
  } catch (const std::exception& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  }
  try {
    const SaddleConstruction saddle = solve_saddle(exp->graph, exp->prob);
    std::cout << "x* = " << num(saddle.point.x_star(0, 0)) << "\n";
    std::cout << "f* = " << num(saddle.point.f_star) << "\n";
    std::cout << "v* =";
    for (Eigen::Index i = 0; i < saddle.point.v_star.rows(); ++i)
      std::cout << ' ' << num(saddle.point.v_star(i, 0));
    std::cout << "\n";
    std::cout << "n =";
    for (Eigen::Index i = 0; i < saddle.multipliers.size(); ++i)
      std::cout << ' ' << num(saddle.multipliers[i]);
    std::cout << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, kExitReferenceFailed, opts.quiet);
  }
}

namespace {

bool same_shared_setup(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.problem != b.problem || a.custom_name != b.custom_name) return false;
  if (a.lambda != b.lambda) return false;
  if (a.agents.size() != b.agents.size()) return false;
  for (size_t i = 0; i < a.agents.size(); ++i)
    if (a.agents[i].p != b.agents[i].p ||
        a.agents[i].lower != b.agents[i].lower ||
        a.agents[i].upper != b.agents[i].upper)
      return false;
  if (a.edges.size() != b.edges.size()) return false;
  for (size_t i = 0; i < a.edges.size(); ++i)
    if (a.edges[i].i != b.edges[i].i || a.edges[i].j != b.edges[i].j ||
        a.edges[i].weight != b.edges[i].weight)
      return false;
  return a.x0 == b.x0 && a.v0 == b.v0;
}

}  // namespace

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const Options& opts) {
  try {
    const LoadedExperiment ea = load_experiment(config_a, opts);
    const LoadedExperiment eb = load_experiment(config_b, opts);
    if (!same_shared_setup(ea.cfg, eb.cfg))
      throw ConfigError(
          "config: compare needs identical graph, problem and initial state");
    check_connectivity_assumption(ea.graph);

    const ReferenceData ref = try_reference(ea);
    std::ostream* log = opts.quiet ? nullptr : &std::cerr;
    const std::vector<TraceRecord> ta = run_annotated(ea, ref, log);
    const std::vector<TraceRecord> tb = run_annotated(eb, ref, log);

    write_csv(ta, ea.cfg.out);
    write_csv(tb, eb.cfg.out);

    const std::string joined = opts.out.value_or("compare.csv");
    std::ofstream out(joined);
    if (!out) throw std::runtime_error("compare: cannot open " + joined);
    out << "k,residual_a,residual_b\n";
    const size_t rows = std::min(ta.size(), tb.size());
    for (size_t r = 0; r < rows; ++r) {
      out << ta[r].k << ',';
      if (ta[r].residual) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *ta[r].residual);
        out << buf;
      }
      out << ',';
      if (tb[r].residual) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *tb[r].residual);
        out << buf;
      }
      out << '\n';
    }

    if (!opts.quiet) {
      std::cout << "overshoot_a=" << num(overshoot_statistic(ta, 100))
                << " overshoot_b=" << num(overshoot_statistic(tb, 100))
                << "\n";
    }
    return kExitOk;
  } catch (const AssumptionError& e) {
    return report_error(e, kExitAssumptionViolated, opts.quiet);
  } catch (const ConfigError& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  } catch (const std::exception& e) {
    return report_error(e, kExitConfigError, opts.quiet);
  }
}

}  // namespace pdes::cli
