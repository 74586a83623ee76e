#include "pdes/dynamics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pdes {

namespace {

void check_state(const CommGraph& g, const ProblemInstance& prob,
                 const NetworkState& s) {
  const int n = g.node_count();
  const int d = prob.dimension();
  if (prob.agent_count() != n)
    throw std::invalid_argument("dynamics: agent count != node count");
  if (s.x.rows() != n || s.x.cols() != d || s.v.rows() != n || s.v.cols() != d)
    throw std::invalid_argument("dynamics: state shape mismatch");
}

Eigen::VectorXd agent_subgradient(const ProblemInstance& prob,
                                  const NetworkState& s, int i, double eps) {
  Eigen::VectorXd gi =
      prob.agent(i).objective.eps_subgradient(s.x.row(i).transpose(), eps);
  if (gi.size() != prob.dimension())
    throw std::invalid_argument("dynamics: oracle returned wrong dimension");
  return gi;
}

}  // namespace

Eigen::VectorXd stack_state(const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& v) {
  const auto n = x.rows();
  const auto d = x.cols();
  Eigen::VectorXd z(2 * n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    z.segment(i * d, d) = x.row(i).transpose();
    z.segment((n + i) * d, d) = v.row(i).transpose();
  }
  return z;
}

Schedule Schedule::power(double a, double b, double p) {
  if (!(a >= 0.0)) throw std::invalid_argument("schedule: a must be >= 0");
  if (!(b >= 0.0)) throw std::invalid_argument("schedule: b must be >= 0");
  Schedule s;
  s.family_ = Family::power;
  s.a_ = a;
  s.b_ = b;
  s.p_ = p;
  return s;
}

Schedule Schedule::constant(double a) {
  if (!(a >= 0.0)) throw std::invalid_argument("schedule: a must be >= 0");
  Schedule s;
  s.family_ = Family::constant;
  s.a_ = a;
  return s;
}

Schedule Schedule::custom(std::function<double(long)> fn) {
  if (!fn) throw std::invalid_argument("schedule: null custom function");
  Schedule s;
  s.family_ = Family::custom;
  s.fn_ = std::move(fn);
  return s;
}

double Schedule::operator()(long k) const {
  if (k < 1) throw std::invalid_argument("schedule: k must be >= 1");
  switch (family_) {
    case Family::power:
      return a_ / std::pow(static_cast<double>(k) + b_, p_);
    case Family::constant:
      return a_;
    case Family::custom:
      return fn_(k);
  }
  return 0.0;  // unreachable
}

namespace {

// Diminishing-step condition: sum a_k = inf and sum a_k^2 < inf.
// For the power family a/(k+b)^p this holds iff a > 0 and 1/2 < p <= 1.
ScheduleCheck check_alpha_diminishing(const Schedule& alpha) {
  switch (alpha.family()) {
    case Schedule::Family::constant:
      return {Verdict::invalid, "sum alpha_k^2 diverges (constant step)"};
    case Schedule::Family::power:
      if (alpha.a() == 0.0)
        return {Verdict::invalid, "sum alpha_k diverges... alpha is zero"};
      if (alpha.p() > 1.0)
        return {Verdict::invalid, "sum alpha_k converges (p > 1)"};
      if (alpha.p() <= 0.5)
        return {Verdict::invalid, "sum alpha_k^2 diverges (p <= 1/2)"};
      return {Verdict::valid, "alpha diminishing: 1/2 < p <= 1"};
    case Schedule::Family::custom:
      return {Verdict::undecidable, "custom alpha schedule"};
  }
  return {Verdict::undecidable, "unknown alpha family"};
}

bool identically_zero(const Schedule& s) {
  return (s.family() == Schedule::Family::constant ||
          s.family() == Schedule::Family::power) &&
         s.a() == 0.0;
}

// Summability of the product alpha_k * eps_k for the parametric families.
ScheduleCheck check_product_summable(const Schedule& alpha,
                                     const Schedule& eps) {
  if (identically_zero(eps) || identically_zero(alpha))
    return {Verdict::valid, "product vanishes identically"};
  if (alpha.family() == Schedule::Family::custom ||
      eps.family() == Schedule::Family::custom)
    return {Verdict::undecidable, "custom schedule in the product"};
  const double pa =
      alpha.family() == Schedule::Family::power ? alpha.p() : 0.0;
  const double pe = eps.family() == Schedule::Family::power ? eps.p() : 0.0;
  if (pa + pe > 1.0)
    return {Verdict::valid, "product exponent above 1"};
  return {Verdict::invalid, "sum alpha_k*eps_k diverges (exponent <= 1)"};
}

}  // namespace

ScheduleCheck check_schedule(const Schedule& alpha, const Schedule& eps,
                             ScheduleMode mode) {
  const ScheduleCheck base = check_alpha_diminishing(alpha);
  if (base.verdict == Verdict::invalid) return base;

  ScheduleCheck extra;
  if (mode == ScheduleMode::theorem1) {
    if (eps.family() == Schedule::Family::custom)
      extra = {Verdict::undecidable, "custom eps schedule"};
    else if (eps.family() != Schedule::Family::constant || !(eps.a() > 0.0))
      extra = {Verdict::invalid, "eps must be a positive constant"};
    else
      extra = {Verdict::valid, "constant eps"};
  } else {
    extra = check_product_summable(alpha, eps);
  }

  if (extra.verdict == Verdict::invalid) return extra;
  if (base.verdict == Verdict::undecidable) return base;
  if (extra.verdict == Verdict::undecidable) return extra;
  return {Verdict::valid, base.reason + "; " + extra.reason};
}

Eigen::VectorXd disagreement(const CommGraph& g, const Eigen::MatrixXd& y,
                             int agent) {
  const int n = g.node_count();
  if (y.rows() != n) throw std::invalid_argument("disagreement: shape mismatch");
  if (agent < 0 || agent >= n)
    throw std::invalid_argument("disagreement: agent index out of range");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(y.cols());
  for (int j = 0; j < n; ++j) {
    const double w = g.weight(agent, j);
    if (w > 0.0) acc += w * (y.row(agent) - y.row(j)).transpose();
  }
  return acc;
}

Eigen::MatrixXd apply_laplacian(const CommGraph& g, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd out(y.rows(), y.cols());
  for (int i = 0; i < g.node_count(); ++i)
    out.row(i) = disagreement(g, y, i).transpose();
  return out;
}

Eigen::VectorXd t_operator(const CommGraph& g, const ProblemInstance& prob,
                           const NetworkState& s, double eps) {
  check_state(g, prob, s);
  if (eps < 0.0) throw std::invalid_argument("t_operator: eps must be >= 0");
  const int n = g.node_count();
  const int d = prob.dimension();
  Eigen::VectorXd t(2 * n * d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xhat = disagreement(g, s.x, i);
    const Eigen::VectorXd vhat = disagreement(g, s.v, i);
    const Eigen::VectorXd gi = agent_subgradient(prob, s, i, eps);
    t.segment(i * d, d) = gi + xhat + vhat;
    t.segment((n + i) * d, d) = -xhat;
  }
  return t;
}

NetworkState pd_step(const CommGraph& g, const ProblemInstance& prob,
                     const NetworkState& s, double alpha, double eps) {
  check_state(g, prob, s);
  if (!(alpha > 0.0)) throw std::invalid_argument("pd_step: alpha must be > 0");
  if (eps < 0.0) throw std::invalid_argument("pd_step: eps must be >= 0");
  const int n = g.node_count();
  const int d = prob.dimension();
  NetworkState next;
  next.x.resize(n, d);
  next.v.resize(n, d);
  next.k = s.k + 1;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xhat = disagreement(g, s.x, i);
    const Eigen::VectorXd vhat = disagreement(g, s.v, i);
    const Eigen::VectorXd gi = agent_subgradient(prob, s, i, eps);
    const Eigen::VectorXd inc = gi + xhat + vhat;
    const Eigen::VectorXd xi = s.x.row(i).transpose() - alpha * inc;
    next.x.row(i) = prob.agent(i).set->project(xi).transpose();
    next.v.row(i) =
        (s.v.row(i).transpose() + alpha * xhat).transpose();
  }
  return next;
}

NetworkState stacked_pd_step(const CommGraph& g, const ProblemInstance& prob,
                             const NetworkState& s, double alpha, double eps) {
  check_state(g, prob, s);
  if (!(alpha > 0.0))
    throw std::invalid_argument("stacked_pd_step: alpha must be > 0");
  const int n = g.node_count();
  const int d = prob.dimension();
  const Eigen::VectorXd z = stack_state(s.x, s.v);
  const Eigen::VectorXd t = t_operator(g, prob, s, eps);
  const Eigen::VectorXd moved = z - alpha * t;
  NetworkState next;
  next.x.resize(n, d);
  next.v.resize(n, d);
  next.k = s.k + 1;
  for (int i = 0; i < n; ++i) {
    next.x.row(i) =
        prob.agent(i).set->project(moved.segment(i * d, d)).transpose();
    next.v.row(i) = moved.segment((n + i) * d, d).transpose();
  }
  return next;
}

namespace {

struct NormalizedStep {
  NetworkState state;
  double min_step = 0.0;  // smallest per-agent effective step
};

// Core of the normalized update; the round-count precondition is
// validated by the callers.
NormalizedStep npd_step_detail(const CommGraph& g, const ProblemInstance& prob,
                               const NetworkState& s, double alpha, double eps,
                               const NormalizationConfig& norm) {
  const int n = g.node_count();
  const int d = prob.dimension();
  std::vector<Eigen::VectorXd> xhats(n), incs(n);
  std::vector<double> block_norms(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xhat = disagreement(g, s.x, i);
    const Eigen::VectorXd vhat = disagreement(g, s.v, i);
    const Eigen::VectorXd gi = agent_subgradient(prob, s, i, eps);
    incs[i] = gi + xhat + vhat;
    xhats[i] = xhat;
    block_norms[i] =
        std::sqrt(incs[i].squaredNorm() + xhats[i].squaredNorm());
  }
  const std::vector<double> deltas =
      max_consensus(g, block_norms, norm.rounds);

  NormalizedStep out;
  out.state.x.resize(n, d);
  out.state.v.resize(n, d);
  out.state.k = s.k + 1;
  out.min_step = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double step = alpha / std::max(norm.c, deltas[i]);
    out.min_step = std::min(out.min_step, step);
    const Eigen::VectorXd xi = s.x.row(i).transpose() - step * incs[i];
    out.state.x.row(i) = prob.agent(i).set->project(xi).transpose();
    out.state.v.row(i) =
        (s.v.row(i).transpose() + step * xhats[i]).transpose();
  }
  return out;
}

void check_norm_config(const CommGraph& g, const NormalizationConfig& norm) {
  if (!(norm.c > 0.0))
    throw std::invalid_argument("npd_step: floor constant c must be > 0");
  const int needed = diameter(g) + 1;
  if (norm.rounds < needed) {
    std::ostringstream msg;
    msg << "npd_step: rounds = " << norm.rounds
        << " but the graph needs at least diameter+1 = " << needed;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

NetworkState npd_step(const CommGraph& g, const ProblemInstance& prob,
                      const NetworkState& s, double alpha, double eps,
                      const NormalizationConfig& norm) {
  check_state(g, prob, s);
  if (!(alpha > 0.0)) throw std::invalid_argument("npd_step: alpha must be > 0");
  if (eps < 0.0) throw std::invalid_argument("npd_step: eps must be >= 0");
  check_norm_config(g, norm);
  return npd_step_detail(g, prob, s, alpha, eps, norm).state;
}

namespace {

TraceRecord make_record(const CommGraph& g, const NetworkState& s,
                        double step_used, double eps_used) {
  TraceRecord rec;
  rec.k = s.k;
  rec.x = s.x;
  rec.v = s.v;
  rec.consensus_error = apply_laplacian(g, s.x).norm();
  rec.step_used = step_used;
  rec.eps_used = eps_used;
  return rec;
}

}  // namespace

std::vector<TraceRecord> run(const CommGraph& g, const ProblemInstance& prob,
                             const Schedule& alpha, const Schedule& eps,
                             Eigen::MatrixXd x0, Eigen::MatrixXd v0,
                             long iters, Variant variant,
                             std::optional<NormalizationConfig> norm,
                             std::ostream* log) {
  const int n = g.node_count();
  const int d = prob.dimension();
  if (prob.agent_count() != n)
    throw std::invalid_argument("run: agent count != node count");
  if (x0.rows() != n || x0.cols() != d)
    throw std::invalid_argument("run: x0 shape mismatch");
  if (v0.rows() != n || v0.cols() != d)
    throw std::invalid_argument("run: v0 shape mismatch");
  if (iters < 0) throw std::invalid_argument("run: iters must be >= 0");
  if (variant == Variant::normalized) {
    if (!norm)
      throw std::invalid_argument("run: normalized variant needs a config");
    check_norm_config(g, *norm);
  }

  // The update rule keeps iterates feasible only if they start feasible.
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd original = x0.row(i).transpose();
    const Eigen::VectorXd projected = prob.agent(i).set->project(original);
    if ((projected.array() != original.array()).any()) {
      if (log)
        *log << "note: initial state of agent " << (i + 1)
             << " projected onto its constraint set\n";
      x0.row(i) = projected.transpose();
    }
  }

  {
    const ScheduleCheck strong =
        check_schedule(alpha, eps, ScheduleMode::theorem2);
    const ScheduleCheck weak =
        check_schedule(alpha, eps, ScheduleMode::theorem1);
    if (strong.verdict != Verdict::valid && weak.verdict != Verdict::valid &&
        log)
      *log << "warning: schedule pair satisfies neither validity profile ("
           << strong.reason << ")\n";
  }

  NetworkState state{std::move(x0), std::move(v0), 1};
  std::vector<TraceRecord> trace;
  trace.reserve(static_cast<size_t>(iters) + 1);
  trace.push_back(make_record(g, state, alpha(1), eps(1)));

  for (long k = 1; k <= iters; ++k) {
    const double a = alpha(k);
    const double e = eps(k);
    if (!(a > 0.0))
      throw std::invalid_argument("run: alpha schedule must stay positive");
    if (e < 0.0)
      throw std::invalid_argument("run: eps schedule must stay nonnegative");
    if (variant == Variant::plain) {
      state = pd_step(g, prob, state, a, e);
    } else {
      NormalizedStep step = npd_step_detail(g, prob, state, a, e, *norm);
      trace.back().step_used = step.min_step;
      state = std::move(step.state);
    }
    trace.push_back(make_record(g, state, alpha(state.k), eps(state.k)));
  }
  return trace;
}

}  // namespace pdes
