#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pdes {

/// Edge of an undirected weighted graph, 0-indexed endpoints.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Weighted undirected communication graph stored as a dense symmetric
/// weight matrix with zero diagonal. An edge (i, j) exists iff its weight
/// is strictly positive. N is expected to stay small (tens to hundreds of
/// nodes), so no sparse representation is used.
class CommGraph {
 public:
  /// Validates and adopts a weight matrix: square, symmetric, nonnegative
  /// entries, zero diagonal. Throws std::invalid_argument otherwise.
  explicit CommGraph(Eigen::MatrixXd weights);

  /// Builds a graph from an edge list. Rejects self-loops, nonpositive
  /// weights, out-of-range endpoints and duplicate edges (in either
  /// orientation).
  static CommGraph from_edges(int node_count, const std::vector<Edge>& edges);

  int node_count() const { return static_cast<int>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

  /// Nodes adjacent to i (positive weight), ascending order.
  std::vector<int> neighbors(int i) const;

 private:
  Eigen::MatrixXd weights_;
};

/// Graph Laplacian: diagonal holds the weighted degree, off-diagonal entries
/// are the negated weights. Row sums vanish exactly when the degree is
/// accumulated in the same ascending order used here.
Eigen::MatrixXd laplacian(const CommGraph& g);

/// True iff every node is reachable from every other along positive-weight
/// edges. Decided by graph search, not eigenvalues.
bool is_connected(const CommGraph& g);

/// Maximum over node pairs of the shortest hop count (weights ignored).
/// Throws std::invalid_argument for disconnected graphs.
int diameter(const CommGraph& g);

/// Synchronous max-consensus. Round 1 is the initial assignment; each later
/// round replaces a node's value with the maximum over itself and its
/// neighbors, all nodes reading the previous round (double-buffered).
/// Returns the values after `rounds` rounds, i.e. rounds-1 exchanges.
/// With rounds >= diameter+1 on a connected graph every node holds the
/// global maximum. Throws std::invalid_argument if rounds < 1 or the size
/// of `initial` does not match the node count.
std::vector<double> max_consensus(const CommGraph& g,
                                  const std::vector<double>& initial,
                                  int rounds);

}  // namespace pdes
