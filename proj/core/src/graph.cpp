#include "pdes/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace pdes {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

CommGraph::CommGraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  const auto n = weights_.rows();
  require(n >= 1, "graph: need at least one node");
  require(weights_.cols() == n, "graph: weight matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(weights_(i, i) == 0.0, "graph: nonzero diagonal entry");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      require(std::isfinite(w), "graph: non-finite weight");
      require(w >= 0.0, "graph: negative weight");
      require(w == weights_(j, i), "graph: weight matrix must be symmetric");
    }
  }
}

CommGraph CommGraph::from_edges(int node_count, const std::vector<Edge>& edges) {
  require(node_count >= 1, "graph: need at least one node");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
  for (const Edge& e : edges) {
    require(e.i >= 0 && e.i < node_count && e.j >= 0 && e.j < node_count,
            "graph: edge endpoint out of range");
    require(e.i != e.j, "graph: self-loop edge");
    require(std::isfinite(e.weight) && e.weight > 0.0,
            "graph: edge weight must be positive");
    require(w(e.i, e.j) == 0.0, "graph: duplicate edge");
    w(e.i, e.j) = e.weight;
    w(e.j, e.i) = e.weight;
  }
  return CommGraph(std::move(w));
}

std::vector<int> CommGraph::neighbors(int i) const {
  const int n = node_count();
  require(i >= 0 && i < n, "graph: node index out of range");
  std::vector<int> out;
  for (int j = 0; j < n; ++j)
    if (weights_(i, j) > 0.0) out.push_back(j);
  return out;
}

Eigen::MatrixXd laplacian(const CommGraph& g) {
  const int n = g.node_count();
  const Eigen::MatrixXd& w = g.weights();
  Eigen::MatrixXd lap(n, n);
  for (int i = 0; i < n; ++i) {
    double degree = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      degree += w(i, j);
      lap(i, j) = -w(i, j);
    }
    lap(i, i) = degree;
  }
  return lap;
}

namespace {

// Hop distances from `start`; unreachable nodes stay at -1.
std::vector<int> bfs_hops(const CommGraph& g, int start) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<int> frontier;
  dist[start] = 0;
  frontier.push(start);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v = 0; v < g.node_count(); ++v) {
      if (g.weight(u, v) > 0.0 && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_connected(const CommGraph& g) {
  const auto dist = bfs_hops(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](int d) { return d < 0; });
}

int diameter(const CommGraph& g) {
  int best = 0;
  for (int s = 0; s < g.node_count(); ++s) {
    const auto dist = bfs_hops(g, s);
    for (int d : dist) {
      if (d < 0)
        throw std::invalid_argument(
            "diameter: undefined for a disconnected graph");
      best = std::max(best, d);
    }
  }
  return best;
}

std::vector<double> max_consensus(const CommGraph& g,
                                  const std::vector<double>& initial,
                                  int rounds) {
  const int n = g.node_count();
  if (rounds < 1) throw std::invalid_argument("max_consensus: rounds < 1");
  if (static_cast<int>(initial.size()) != n)
    throw std::invalid_argument("max_consensus: initial size mismatch");

  std::vector<double> current = initial;
  std::vector<double> next(current.size());
  for (int round = 2; round <= rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      double best = current[i];
      for (int j = 0; j < n; ++j)
        if (g.weight(i, j) > 0.0) best = std::max(best, current[j]);
      next[i] = best;
    }
    current.swap(next);
  }
  return current;
}

}  // namespace pdes
