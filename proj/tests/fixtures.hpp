#pragma once

// Shared fixtures: the four-agent LASSO demo setup used across the suites
// (path graph 1-2-3-4 with chord 1-3, unit weights, p_i = 2i,
// lambda = 0.1, X_i = [-11+i, 8-i], x(1) = (1, 0, 5, -1)).

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "pdes/dynamics.hpp"
#include "pdes/graph.hpp"
#include "pdes/problem.hpp"

namespace fixtures {

inline pdes::CommGraph demo_graph() {
  return pdes::CommGraph::from_edges(
      4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 2, 1.0}});
}

inline std::vector<double> demo_p() { return {2.0, 4.0, 6.0, 8.0}; }

inline std::vector<pdes::Interval> demo_sets() {
  std::vector<pdes::Interval> sets;
  for (int i = 1; i <= 4; ++i)
    sets.push_back(pdes::Interval(-11.0 + i, 8.0 - i));
  return sets;
}

inline pdes::ProblemInstance demo_instance(double lambda = 0.1) {
  return pdes::lasso_instance(lambda, demo_p(), demo_sets());
}

inline Eigen::MatrixXd demo_x0() {
  Eigen::MatrixXd x0(4, 1);
  x0 << 1.0, 0.0, 5.0, -1.0;
  return x0;
}

inline Eigen::MatrixXd zeros41() { return Eigen::MatrixXd::Zero(4, 1); }

inline pdes::Schedule demo_alpha() { return pdes::Schedule::power(3, 1, 1); }
inline pdes::Schedule demo_eps() { return pdes::Schedule::power(3, 1, 1); }

inline bool exactly_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

// Random connected graph with n nodes: spanning tree plus extra edges.
inline pdes::CommGraph random_connected_graph(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<pdes::Edge> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    edges.push_back({parent(rng), v, weight(rng)});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool present = false;
      for (const pdes::Edge& e : edges)
        present |= (e.i == i && e.j == j) || (e.i == j && e.j == i);
      if (!present && coin(rng) < 0.25) edges.push_back({i, j, weight(rng)});
    }
  return pdes::CommGraph::from_edges(n, edges);
}

}  // namespace fixtures
