#include "pdes/problem.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pdes {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Interval::Interval() : lower(-kInf), upper(kInf) {}

Interval::Interval(double lo, double hi) : lower(lo), upper(hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw std::invalid_argument("interval: lower must not exceed upper");
}

double Interval::project(double x) const {
  if (x < lower) return lower;
  if (x > upper) return upper;
  return x;
}

bool Interval::contains(double x, double tol) const {
  return x >= lower - tol && x <= upper + tol;
}

bool Interval::bounded() const {
  return std::isfinite(lower) && std::isfinite(upper);
}

std::optional<Interval> intersect(const std::vector<Interval>& sets) {
  double lo = -kInf, hi = kInf;
  for (const Interval& s : sets) {
    lo = std::max(lo, s.lower);
    hi = std::min(hi, s.upper);
  }
  if (lo > hi) return std::nullopt;
  return Interval(lo, hi);
}

BoxSet::BoxSet(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw std::invalid_argument("box: zero dimension");
}

BoxSet::BoxSet(Interval bounds) : bounds_{bounds} {}

Eigen::VectorXd BoxSet::project(const Eigen::VectorXd& x) const {
  if (x.size() != dim())
    throw std::invalid_argument("box: projection dimension mismatch");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c)
    out[c] = bounds_[static_cast<size_t>(c)].project(x[c]);
  return out;
}

bool BoxSet::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index c = 0; c < x.size(); ++c)
    if (!bounds_[static_cast<size_t>(c)].contains(x[c], tol)) return false;
  return true;
}

ProblemInstance::ProblemInstance(int dimension, std::vector<Agent> agents)
    : dimension_(dimension), agents_(std::move(agents)) {
  if (dimension_ < 1) throw std::invalid_argument("problem: dimension < 1");
  if (agents_.empty()) throw std::invalid_argument("problem: no agents");
  bool all_boxes = true;
  for (const Agent& a : agents_) {
    if (!a.set) throw std::invalid_argument("problem: agent without a set");
    if (a.set->dim() != dimension_)
      throw std::invalid_argument("problem: set dimension mismatch");
    if (!a.objective.value || !a.objective.eps_subgradient)
      throw std::invalid_argument("problem: agent oracle incomplete");
    if (!dynamic_cast<const BoxSet*>(a.set.get())) all_boxes = false;
  }
  if (all_boxes) {
    for (int c = 0; c < dimension_; ++c) {
      std::vector<Interval> coords;
      coords.reserve(agents_.size());
      for (const Agent& a : agents_)
        coords.push_back(
            static_cast<const BoxSet*>(a.set.get())->bounds()[c]);
      if (!intersect(coords))
        throw std::invalid_argument(
            "problem: constraint sets have empty intersection");
    }
  }
}

double ProblemInstance::objective_value(const Eigen::MatrixXd& x) const {
  if (x.rows() != agent_count() || x.cols() != dimension_)
    throw std::invalid_argument("problem: state shape mismatch");
  double total = 0.0;
  for (int i = 0; i < agent_count(); ++i)
    total += agents_[i].objective.value(x.row(i).transpose());
  return total;
}

std::optional<std::vector<Interval>> ProblemInstance::interval_bounds() const {
  if (dimension_ != 1) return std::nullopt;
  std::vector<Interval> out;
  out.reserve(agents_.size());
  for (const Agent& a : agents_) {
    const auto* box = dynamic_cast<const BoxSet*>(a.set.get());
    if (!box) return std::nullopt;
    out.push_back(box->bounds()[0]);
  }
  return out;
}

std::optional<Interval> ProblemInstance::feasible_interval() const {
  const auto bounds = interval_bounds();
  if (!bounds) return std::nullopt;
  return intersect(*bounds);
}

double lasso_value(double x, double p, double lambda) {
  return 0.5 * (x - p) * (x - p) + lambda * std::abs(x);
}

double lasso_eps_subgradient(double x, double p, double lambda, double eps) {
  // |x| > eps/2 >= 0 in the outer branches, so the division is safe; with
  // eps = 0 the correction term vanishes and this is the exact subgradient.
  if (x < -eps / 2) return x - p - lambda - lambda * eps / x;
  if (x > eps / 2) return x - p + lambda - lambda * eps / x;
  return x - p + lambda;
}

ProblemInstance lasso_instance(double lambda, const std::vector<double>& p,
                               const std::vector<Interval>& sets) {
  if (p.empty() || p.size() != sets.size())
    throw std::invalid_argument("lasso: p and sets must have equal size >= 1");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("lasso: lambda must be nonnegative");
  std::vector<Agent> agents;
  agents.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    AgentObjective obj;
    obj.value = [pi, lambda](const Eigen::VectorXd& x) {
      return lasso_value(x[0], pi, lambda);
    };
    obj.eps_subgradient = [pi, lambda](const Eigen::VectorXd& x, double eps) {
      Eigen::VectorXd g(1);
      g[0] = lasso_eps_subgradient(x[0], pi, lambda, eps);
      return g;
    };
    agents.push_back({std::move(obj), std::make_shared<BoxSet>(sets[i])});
  }
  return ProblemInstance(1, std::move(agents));
}

bool validate_eps_subgradient(const AgentObjective& objective,
                              const Eigen::VectorXd& x, double eps,
                              const std::vector<Eigen::VectorXd>& probes,
                              double tol) {
  const double fx = objective.value(x);
  const Eigen::VectorXd g = objective.eps_subgradient(x, eps);
  for (const Eigen::VectorXd& y : probes) {
    const double lhs = objective.value(y);
    const double rhs = fx + g.dot(y - x) - eps;
    if (lhs < rhs - tol) return false;
  }
  return true;
}

bool validate_eps_subgradient(const AgentObjective& objective, double x,
                              double eps, const std::vector<double>& probes,
                              double tol) {
  Eigen::VectorXd xv(1);
  xv[0] = x;
  std::vector<Eigen::VectorXd> pv;
  pv.reserve(probes.size());
  for (double y : probes) {
    Eigen::VectorXd yv(1);
    yv[0] = y;
    pv.push_back(std::move(yv));
  }
  return validate_eps_subgradient(objective, xv, eps, pv, tol);
}

namespace {

std::map<std::string, InstanceFactory>& registry() {
  static std::map<std::string, InstanceFactory> instances;
  return instances;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_instance(const std::string& name, InstanceFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

const InstanceFactory* find_instance(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  return it == registry().end() ? nullptr : &it->second;
}

}  // namespace pdes
