#pragma once

#include <utility>
#include <vector>

#include "fgft/graph.hpp"
#include "fgft/symmetry.hpp"

namespace fgft {

/// One butterfly stage of Haar units in node-index space: the permuted
/// B_{n,p} built from an involution. Each pair (i, j) has i in V_X and
/// j = phi(i) in V_Y; passthrough lists V_Z.
struct HaarStage {
  int n = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> passthrough;

  static HaarStage from_involution(const Involution& phi);
};

/// B_{n,p}: p Haar units pairing index i with n-1-i, middle n-2p passed through.
Matrix butterfly_matrix(int n, int p);

/// The orthogonal (and symmetric) matrix of a stage: 1/sqrt2 on (i,i) and the
/// cross slots of each pair, -1/sqrt2 on (j,j), 1 on passthrough nodes.
Matrix haar_stage_matrix(const HaarStage& stage);

/// B^T x without forming B: sums land on V_X nodes, differences
/// (x_phi(j) - x_j)/sqrt2 on V_Y nodes, V_Z untouched.
Vector haar_outputs(const HaarStage& stage, const Vector& x);

/// B^T L B.
Matrix conjugated_laplacian(const Matrix& L, const HaarStage& stage);

/// Largest |entry| of B^T L B coupling V_X u V_Z with V_Y.
double off_block_norm(const Matrix& conjugated, const HaarStage& stage);

struct DecompositionResult {
  Graph g_plus;                  ///< on V_X (parent order) then V_Z (parent order)
  Graph g_minus;                 ///< on V_Y in ascending parent order
  std::vector<int> plus_nodes;   ///< g_plus node k -> parent node
  std::vector<int> minus_nodes;  ///< g_minus node k -> parent node
  HaarStage stage;
};

/// Splits a phi-symmetric graph into G+ and G- using the closed-form weight
/// rules. Cancelled edges (|w| <= tol * max weight) are dropped.
/// Throws std::invalid_argument when g is not phi-symmetric.
DecompositionResult decompose(const Graph& g, const Involution& phi, double tol = kWeightTol);

/// Even/odd parts of a signal w.r.t. phi: x = even + odd,
/// even(i) = even(phi(i)), odd(i) = -odd(phi(i)), odd = 0 on fixed points.
std::pair<Vector, Vector> even_odd_components(const Vector& x, const Involution& phi);

struct Component {
  Graph graph;
  std::vector<int> nodes;  ///< component node k -> parent node, ascending
};

/// Connected components, ordered by smallest member.
std::vector<Component> split_components(const Graph& g);

}  // namespace fgft
