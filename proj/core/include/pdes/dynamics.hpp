#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdes/graph.hpp"
#include "pdes/problem.hpp"
#include "pdes/trace.hpp"

namespace pdes {

/// Stacked primal/dual state of the network at iteration k. One agent per
/// row; after every step each primal row lies in its agent's constraint set.
struct NetworkState {
  Eigen::MatrixXd x;  // N-by-d primal estimates
  Eigen::MatrixXd v;  // N-by-d dual variables
  long k = 1;
};

/// col(x, v) as a single 2Nd vector, agent-major.
Eigen::VectorXd stack_state(const Eigen::MatrixXd& x, const Eigen::MatrixXd& v);

/// Step-size / inexactness sequences. The power family is a/(k+b)^p, the
/// constant family is a; custom schedules evaluate a user function and are
/// undecidable for the symbolic validity checks.
class Schedule {
 public:
  enum class Family { power, constant, custom };

  static Schedule power(double a, double b, double p);
  static Schedule constant(double a);
  static Schedule custom(std::function<double(long)> fn);

  double operator()(long k) const;  // k >= 1

  Family family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double p() const { return p_; }

 private:
  Schedule() = default;
  Family family_ = Family::constant;
  double a_ = 0.0, b_ = 0.0, p_ = 0.0;
  std::function<double(long)> fn_;
};

/// Validity profiles for the (alpha_k, eps_k) pair.
///   theorem1: alpha diminishing (sum alpha = inf, sum alpha^2 < inf) with a
///             constant eps_0 > 0; guarantees bounded suboptimality N*eps_0.
///   theorem2: alpha diminishing as above and sum alpha_k*eps_k < inf;
///             guarantees exact optimal consensus.
enum class ScheduleMode { theorem1, theorem2 };

enum class Verdict { valid, invalid, undecidable };

struct ScheduleCheck {
  Verdict verdict = Verdict::undecidable;
  std::string reason;
};

/// Symbolic check of the schedule pair against the requested profile.
/// Decided on the parametric families only; custom schedules yield
/// "undecidable" unless a decidable part already fails.
ScheduleCheck check_schedule(const Schedule& alpha, const Schedule& eps,
                             ScheduleMode mode);

/// Per-agent normalization: step alpha_k / max(c, delta_i) where delta_i is
/// the agent's consensus estimate of the largest local operator block norm,
/// obtained by `rounds` rounds of max-consensus. rounds must be at least
/// diameter+1 for all agents to agree on the global maximum.
struct NormalizationConfig {
  double c = 1.0;   // > 0, floor of the normalizer
  int rounds = 1;   // >= diameter(graph) + 1
};

enum class Variant { plain, normalized };

/// i-th block of the Laplacian product: sum_j a_ij (y_i - y_j), ascending j.
/// This is the one canonical summation order; every other routine applies
/// the Laplacian through it so that alternative update routes stay bitwise
/// identical.
Eigen::VectorXd disagreement(const CommGraph& g, const Eigen::MatrixXd& y,
                             int agent);

/// All blocks at once: row i equals disagreement(g, y, i).
Eigen::MatrixXd apply_laplacian(const CommGraph& g, const Eigen::MatrixXd& y);

/// Stacked operator value at state s:
///   top block    g(k) + L v + L x   (g from the eps-subgradient oracles)
///   bottom block -L x
/// Returned as a 2Nd vector, agent-major within each block.
Eigen::VectorXd t_operator(const CommGraph& g, const ProblemInstance& prob,
                           const NetworkState& s, double eps);

/// One synchronous projected primal-dual step, per-agent form:
///   x_i <- P_i[x_i - alpha (g_i + xhat_i + vhat_i)]
///   v_i <- v_i + alpha xhat_i
/// All reads use the pre-step state; k increments.
NetworkState pd_step(const CommGraph& g, const ProblemInstance& prob,
                     const NetworkState& s, double alpha, double eps);

/// The same step computed through the stacked route
///   z <- P[z - alpha T(z)]
/// (projection acts on the primal block only). Agrees bitwise with pd_step;
/// kept as an independent second route for cross-checking.
NetworkState stacked_pd_step(const CommGraph& g, const ProblemInstance& prob,
                             const NetworkState& s, double alpha, double eps);

/// Normalized step: each agent divides alpha by max(c, delta_i) where
/// delta_i comes from max-consensus over the per-agent operator block norms
/// ||col(g_i + xhat_i + vhat_i, -xhat_i)||. Throws std::invalid_argument
/// when norm.rounds < diameter(g) + 1.
NetworkState npd_step(const CommGraph& g, const ProblemInstance& prob,
                      const NetworkState& s, double alpha, double eps,
                      const NormalizationConfig& norm);

/// Experiment driver. Produces iters+1 records (initial state included).
/// Infeasible rows of x0 are projected onto their sets up front (logged).
/// An invalid schedule pair is logged as a warning; the run proceeds.
/// `log` may be null to silence notices.
std::vector<TraceRecord> run(const CommGraph& g, const ProblemInstance& prob,
                             const Schedule& alpha, const Schedule& eps,
                             Eigen::MatrixXd x0, Eigen::MatrixXd v0,
                             long iters, Variant variant,
                             std::optional<NormalizationConfig> norm = {},
                             std::ostream* log = nullptr);

}  // namespace pdes
