#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdes {

/// Closed nonempty interval of the extended real line.
struct Interval {
  double lower;
  double upper;

  Interval();  // (-inf, +inf)
  Interval(double lo, double hi);  // throws if lo > hi or either is NaN

  double project(double x) const;
  bool contains(double x, double tol = 0.0) const;
  bool bounded() const;
};

/// Intersection of intervals; empty optional when the intersection is empty.
std::optional<Interval> intersect(const std::vector<Interval>& sets);

/// Closed convex constraint set with Euclidean projection.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd project(const Eigen::VectorXd& x) const = 0;
  virtual bool contains(const Eigen::VectorXd& x, double tol = 0.0) const = 0;
};

/// Axis-aligned box: one Interval per coordinate.
class BoxSet final : public ConstraintSet {
 public:
  explicit BoxSet(std::vector<Interval> bounds);
  explicit BoxSet(Interval bounds);  // one-dimensional convenience

  int dim() const override { return static_cast<int>(bounds_.size()); }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const override;
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const override;
  const std::vector<Interval>& bounds() const { return bounds_; }

 private:
  std::vector<Interval> bounds_;
};

/// Local objective oracle: function value plus a deterministic selection
/// from the eps-subdifferential. A selection g at (x, eps) must satisfy
///   f(y) >= f(x) + g'(y - x) - eps   for all y,
/// and with eps = 0 it is an exact subgradient.
struct AgentObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> eps_subgradient;
};

struct Agent {
  AgentObjective objective;
  std::shared_ptr<const ConstraintSet> set;
};

/// A network optimization problem: N agents, each with a private objective
/// and a private constraint set of common dimension d. When every set is a
/// BoxSet the constructor verifies the per-coordinate intersection is
/// nonempty and throws std::invalid_argument otherwise; generic sets are
/// accepted unchecked.
class ProblemInstance {
 public:
  ProblemInstance(int dimension, std::vector<Agent> agents);

  int agent_count() const { return static_cast<int>(agents_.size()); }
  int dimension() const { return dimension_; }
  const Agent& agent(int i) const { return agents_.at(i); }

  /// Separable objective: sum of f_i(x_i) over the agent rows of x (N-by-d).
  double objective_value(const Eigen::MatrixXd& x) const;

  /// Per-agent intervals when d == 1 and every set is a BoxSet.
  std::optional<std::vector<Interval>> interval_bounds() const;
  /// Intersection of the above; empty optional when not interval-based.
  std::optional<Interval> feasible_interval() const;

 private:
  int dimension_;
  std::vector<Agent> agents_;
};

double lasso_value(double x, double p, double lambda);

/// Selection from the eps-subdifferential of f(x) = (x-p)^2/2 + lambda*|x|:
///   x - p - lambda - lambda*eps/x   for x < -eps/2,
///   x - p + lambda                  for -eps/2 <= x <= eps/2,
///   x - p + lambda - lambda*eps/x   for x > eps/2.
/// The case split keeps the division away from x = 0. Requires lambda >= 0
/// and eps >= 0; with eps = 0 this is an exact subgradient.
double lasso_eps_subgradient(double x, double p, double lambda, double eps);

/// N scalar agents with f_i(x) = (x-p_i)^2/2 + lambda*|x| and interval
/// constraint sets. Throws when sizes mismatch, lambda < 0, or the interval
/// intersection is empty.
ProblemInstance lasso_instance(double lambda, const std::vector<double>& p,
                               const std::vector<Interval>& sets);

/// Checks the subgradient slack inequality
///   f(y) >= f(x) + g'(y - x) - eps - tol
/// at every probe point y for the oracle's selection g at (x, eps).
bool validate_eps_subgradient(const AgentObjective& objective,
                              const Eigen::VectorXd& x, double eps,
                              const std::vector<Eigen::VectorXd>& probes,
                              double tol = 1e-12);
/// One-dimensional convenience overload.
bool validate_eps_subgradient(const AgentObjective& objective, double x,
                              double eps, const std::vector<double>& probes,
                              double tol = 1e-12);

/// Registry for problem instances referenced by name from config files.
using InstanceFactory = std::function<ProblemInstance()>;
void register_instance(const std::string& name, InstanceFactory factory);
const InstanceFactory* find_instance(const std::string& name);

}  // namespace pdes
