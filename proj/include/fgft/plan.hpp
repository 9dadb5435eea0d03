#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fgft/graph.hpp"
#include "fgft/symmetry.hpp"

namespace fgft {

/// Unnormalized butterfly: out[i] = x_i + x_j, out[j] = x_i - x_j for each
/// (i, j). The missing 1/sqrt2 factors are folded into later stages.
struct HaarButterfly {
  std::vector<std::pair<int, int>> pairs;
};

/// Gather: out[k] = in[perm[k]].
struct Permutation {
  std::vector<int> perm;
};

/// out[offset, offset + k) = matrix * in[offset, offset + k).
struct DenseBlock {
  int offset = 0;
  Matrix matrix;
};

/// out[i] = factors[i] * in[i].
struct Scale {
  Vector factors;
};

/// Givens rotation applied transposed: x_p' = c x_p + s x_q,
/// x_q' = -s x_p + c x_q with c = cos(theta), s = sin(theta).
struct GivensRotation {
  int p = 0;
  int q = 0;
  double theta = 0.0;
};

/// Rotations on disjoint index pairs.
struct GivensLayer {
  std::vector<GivensRotation> rotations;
};

using PlanStage = std::variant<HaarButterfly, Permutation, DenseBlock, Scale, GivensLayer>;

enum class PlanNodeKind { Leaf, Haar, Split };

/// One sub-problem of the recursive planner.
struct PlanNode {
  PlanNodeKind kind = PlanNodeKind::Leaf;
  int depth = 0;                  ///< number of Haar levels above this node
  std::vector<int> positions;     ///< signal positions of the sub-graph's nodes
  std::vector<int> phi;           ///< involution used here (local labels), Haar nodes only
  std::vector<int> children;      ///< indices into FastGftPlan::provenance
  std::vector<int> coefficients;  ///< output coefficients produced below, ascending
};

/// Stages applied in order compute U^T x. Output coefficient k belongs to
/// eigenvalues[k]. provenance[0] is the root when present.
struct FastGftPlan {
  int n = 0;
  std::vector<PlanStage> stages;
  Vector eigenvalues;
  std::vector<PlanNode> provenance;
};

struct OpCount {
  std::int64_t additions = 0;
  std::int64_t multiplications = 0;

  bool operator==(const OpCount&) const = default;
};

struct PlanStrategy {
  std::uint64_t search_budget = kDefaultSearchBudget;
  int max_depth = 16;
  int min_leaf_size = 2;
  double tol = kWeightTol;
  /// Candidate involutions for the root; searched as usual when empty or
  /// when none of them is a symmetry of the graph.
  std::vector<Involution> hints;
  /// When non-negative, every leaf is approximated by this many greedy
  /// truncated-Jacobi Givens layers instead of an exact dense transform.
  int leaf_givens_layers = -1;
};

/// Recursive planner. At each sub-problem: split into connected components,
/// otherwise find candidate involutions (tree search for trees, pruned search
/// otherwise), keep the one whose G+ and G- are cheapest one level down,
/// emit its Haar pairs and recurse on G+ and G-.
/// Sub-problems with no symmetry, at most min_leaf_size nodes, or at
/// max_depth become dense leaves. Coefficients come out in ascending
/// eigenvalue order; near-ties keep planner order (G+ before G-).
FastGftPlan plan_fast_gft(const Graph& g, const PlanStrategy& strategy = {});

/// Single dense leaf holding the full GFT matrix.
FastGftPlan dense_plan(const Graph& g);

Vector apply(const FastGftPlan& plan, const Vector& x);

/// Signals are the columns of X. With threads > 1 the columns are split
/// across workers; each column is computed exactly as apply() would.
Matrix apply_batch(const FastGftPlan& plan, const Matrix& X, int threads = 1);

/// Haar pair: 2 additions. Dense k x k: k^2 multiplications, k(k-1)
/// additions. Scale: 1 multiplication per factor with |f| != 1. Givens
/// rotation: 4 multiplications, 2 additions. Permutations are free.
OpCount op_count(const FastGftPlan& plan);
OpCount op_count(const PlanStage& stage);

/// The n x n matrix P with apply(plan, x) == P x, so the realized GFT is P^T.
Matrix realized_matrix(const FastGftPlan& plan);

/// Orthogonality error max|P P^T - I|.
double orthogonality_error(const FastGftPlan& plan);

/// max|L P^T - P^T diag(eigenvalues)| / max(1, max|L|).
double diagonalization_error(const FastGftPlan& plan, const Graph& g);

/// Map from the input of provenance node `node` (normalized values at its
/// positions, in order) to its coefficients (in ascending output order): the
/// sub-GFT that node realizes.
Matrix subtransform(const FastGftPlan& plan, int node);

int haar_stage_count(const FastGftPlan& plan);

std::string plan_to_json(const FastGftPlan& plan, bool with_provenance = true);
/// Throws std::invalid_argument on malformed input and NumericalError when the
/// stages do not compose to an orthogonal map (max|P P^T - I| > 1e-9).
FastGftPlan plan_from_json(std::string_view text);

FastGftPlan load_plan(const std::string& path);
void save_plan(const FastGftPlan& plan, const std::string& path);

}  // namespace fgft
