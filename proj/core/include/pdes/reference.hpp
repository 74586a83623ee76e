#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pdes/dynamics.hpp"
#include "pdes/graph.hpp"
#include "pdes/problem.hpp"
#include "pdes/trace.hpp"

namespace pdes {

/// Saddle point of the augmented Lagrangian: x_star has all agent rows equal
/// to a consensus optimum, v_star is the mean-zero dual certificate, f_star
/// the optimal objective value.
struct SaddlePoint {
  Eigen::MatrixXd x_star;  // N-by-d
  Eigen::MatrixXd v_star;  // N-by-d
  double f_star = 0.0;
};

struct SaddleConstruction {
  SaddlePoint point;
  Eigen::VectorXd subgradients;  // exact selections g_i at the optimum (d = 1)
  Eigen::VectorXd multipliers;   // normal-cone multipliers n_i
};

/// Augmented Lagrangian value f(x) + v'Lx + x'Lx/2 (Laplacian acting per
/// coordinate for d > 1).
double phi(const CommGraph& g, const ProblemInstance& prob,
           const Eigen::MatrixXd& x, const Eigen::MatrixXd& v);

/// Suboptimality diagnostic
///   delta(x) = phi(x, v*) - phi(x*, v*) + x'Lx/2,
/// nonnegative for a valid saddle point. Values below -1e-9 raise
/// std::runtime_error (the saddle input is inconsistent).
double delta(const CommGraph& g, const ProblemInstance& prob,
             const Eigen::MatrixXd& x, const SaddlePoint& saddle);

struct ScalarOptimum {
  double x_star = 0.0;
  double f_star = 0.0;
};

/// Centralized ground truth for scalar problems (d = 1, interval sets):
/// minimizes the summed objective over the interval intersection by grid
/// scan plus golden-section refinement, to 1e-8 in the argument.
ScalarOptimum solve_1d(const ProblemInstance& prob);

/// Constructs a saddle point for a scalar interval-constrained problem on a
/// connected graph: consensus block from solve_1d, normal-cone multipliers
/// balancing the exact subgradient selections, and the mean-zero
/// least-squares dual solving L v* = -(g* + n). Verifies the saddle
/// inequalities on deterministic random probes. Throws std::runtime_error
/// when no multiplier assignment balances or verification fails.
SaddleConstruction solve_saddle(const CommGraph& g,
                                const ProblemInstance& prob);

struct SupermartingaleFit {
  bool holds = false;
  double constant = 0.0;  // smallest C >= 0 covering every step
};

/// Fits the smallest C >= 0 such that, along the recorded trajectory,
///   ||z(k+1)-z*||^2 <= (1+C a_k^2) ||z(k)-z*||^2
///                      - 2 a_k delta(x(k)) + 2 N a_k e_k + C a_k^2
/// holds at every k, where a_k, e_k come from the given schedules. The
/// per-step lower bound on C is closed-form; holds is false only when some
/// step admits no finite C.
SupermartingaleFit fit_supermartingale_bound(
    const std::vector<TraceRecord>& trace, const CommGraph& g,
    const ProblemInstance& prob, const SaddlePoint& saddle,
    const Schedule& alpha, const Schedule& eps);

/// Fills objective_gap and residual from the central optimum, and delta when
/// a saddle point is supplied. Leaves the residual empty when the initial
/// state already sits at the optimum.
void annotate_trace(std::vector<TraceRecord>& trace, const CommGraph& g,
                    const ProblemInstance& prob,
                    const Eigen::MatrixXd& x_star, double f_star,
                    const SaddlePoint* saddle = nullptr);

}  // namespace pdes
