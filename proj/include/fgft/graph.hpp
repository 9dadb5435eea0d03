#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fgft/common.hpp"

namespace fgft {

/// Undirected weighted graph with optional self-loops.
///
/// Edges are stored once, keyed by (i, j) with i < j. Self-loop weights are
/// kept separately and never appear as edges. Zero weights mean "no edge":
/// setting a weight to zero removes it. Negative weights are allowed since
/// decomposed sub-graphs routinely carry them. Node indices are 0-based.
class Graph {
 public:
  using EdgeMap = std::map<std::pair<int, int>, double>;

  Graph() = default;
  explicit Graph(int n);

  int size() const { return n_; }

  /// Sets w(i, j) (order-insensitive). i == j is rejected; use set_self_loop.
  void set_edge(int i, int j, double w);
  void set_self_loop(int i, double s);

  /// Edge weight, 0 if absent. weight(i, i) returns 0; see self_loop().
  double weight(int i, int j) const;
  double self_loop(int i) const { return self_loops_.at(static_cast<size_t>(i)); }

  const EdgeMap& edges() const { return edges_; }
  const std::vector<double>& self_loops() const { return self_loops_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  bool has_self_loops() const;

  /// Sum of incident edge weights (self-loop excluded).
  double degree(int i) const;

  /// Neighbour lists (j, w) with j ascending.
  std::vector<std::vector<std::pair<int, double>>> adjacency() const;

  /// Dense n x n weight matrix with zero diagonal.
  Matrix weight_matrix() const;

  /// Largest absolute edge or self-loop weight (0 for an empty graph).
  double max_abs_weight() const;

  bool operator==(const Graph& other) const = default;

 private:
  void check_index(int i) const;

  int n_ = 0;
  EdgeMap edges_;
  std::vector<double> self_loops_;
};

/// Weight-by-weight comparison with relative tolerance.
bool approx_equal(const Graph& a, const Graph& b, double tol = kWeightTol);

/// Two node sets; every edge has one endpoint in each.
struct Bipartition {
  std::vector<int> s1;
  std::vector<int> s2;
};

/// L = D - W + S.
Matrix laplacian(const Graph& g);

/// Inverse of laplacian(): s_i = sum_j l_ij and w_ij = -l_ij. Values whose
/// magnitude is at most zero_tol * max|l_ij| are treated as zero. Throws
/// std::invalid_argument for a non-square or asymmetric matrix.
Graph graph_from_laplacian(const Matrix& L, double zero_tol = kWeightTol);

/// D^{-1/2} L D^{-1/2} with d_i = l_ii. Throws if some d_i <= 0.
Matrix normalized_laplacian(const Graph& g);

/// BFS two-colouring over nonzero edges, one component at a time; the lowest
/// index of each component goes to s1. Self-loops are ignored.
std::optional<Bipartition> is_bipartite(const Graph& g);

/// Bipartition plus the common weighted degree k, when the graph is
/// bipartite, loop-free, k-regular and |s1| == |s2|.
std::optional<std::pair<Bipartition, double>> is_k_regular_bipartite(const Graph& g,
                                                                     double tol = kWeightTol);

/// f^T L f.
double quadratic_form(const Matrix& L, std::span<const double> f);
/// sum_edges w_ij (f_i - f_j)^2 + sum_k s_k f_k^2.
double quadratic_form(const Graph& g, std::span<const double> f);

/// Sub-graph induced by `nodes`; node k of the result is nodes[k] of g.
Graph induced_subgraph(const Graph& g, std::span<const int> nodes);

/// Relabels nodes: node k of the result is order[k] of g.
Graph permute_nodes(const Graph& g, std::span<const int> order);

/// {"n": .., "edges": [[i, j, w], ...], "self_loops": [[i, s], ...]}
std::string graph_to_json(const Graph& g);
/// Accepts edges in either orientation. Throws std::invalid_argument.
Graph graph_from_json(std::string_view text);

Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

}  // namespace fgft
