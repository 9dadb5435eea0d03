#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fgft/graph.hpp"

namespace fgft {

/// True iff phi o phi is the identity. Throws std::invalid_argument when phi
/// is not a permutation of 0..n-1.
bool is_involution(std::span<const int> phi);

/// A self-inverse node permutation. Construction validates.
class Involution {
 public:
  Involution() = default;
  explicit Involution(std::vector<int> phi);

  static Involution identity(int n);

  int size() const { return static_cast<int>(phi_.size()); }
  int operator[](int i) const { return phi_[static_cast<size_t>(i)]; }
  const std::vector<int>& map() const { return phi_; }

  /// Number of 2-cycles, i.e. Haar units available.
  int pair_count() const;
  bool is_identity() const { return pair_count() == 0; }

  auto operator<=>(const Involution&) const = default;

 private:
  std::vector<int> phi_;
};

/// Fixed points and the two sides of a node pairing.
struct NodePartition {
  std::vector<int> vx;  ///< smaller index of each 2-cycle, ascending
  std::vector<int> vy;  ///< vy[k] == phi(vx[k])
  std::vector<int> vz;  ///< fixed points, ascending
  std::vector<std::pair<int, int>> pairs;  ///< (vx[k], vy[k])

  int pair_count() const { return static_cast<int>(vx.size()); }
};

NodePartition partition(const Involution& phi);

/// w_ij == w_{phi(i) phi(j)} for all i, j, self-loops included.
bool is_phi_symmetric(const Graph& g, const Involution& phi, double tol = kWeightTol);

struct InvolutionSearchResult {
  std::vector<Involution> involutions;  ///< descending pair count, then lexicographic
  bool truncated = false;               ///< budget ran out before the search finished
  std::uint64_t extensions = 0;         ///< candidate assignments tried
};

inline constexpr std::uint64_t kDefaultSearchBudget = 1'000'000;

/// Backtracking over node pairings restricted to nodes with matching
/// signatures (degree, self-loop, sorted incident weights). Returns every
/// non-identity involution under which g is symmetric, unless the budget of
/// candidate extensions runs out first.
InvolutionSearchResult search_involutions(const Graph& g,
                                          std::uint64_t budget = kDefaultSearchBudget,
                                          double tol = kWeightTol);

/// True when g is connected with n - 1 edges.
bool is_tree(const Graph& g);

/// Involutions of a tree obtained by swapping identical branches hanging off a
/// common root (or the two halves around a central edge). Branches are
/// compared with canonical rooted-subtree codes that fold in edge weights and
/// self-loops. Returns the single-swap involutions plus the maximal combined
/// one, each verified with is_phi_symmetric, sorted like search_involutions.
/// Throws std::invalid_argument if g is not a tree.
std::vector<Involution> search_involutions_tree(const Graph& g, double tol = kWeightTol);

/// Number of involutions on n elements. Exact; throws std::overflow_error
/// once the value no longer fits in 64 bits (n > 31).
std::uint64_t involution_count(int n);

/// Orders by descending pair count, ties lexicographic.
void sort_involutions(std::vector<Involution>& list);

std::string involution_to_json(const Involution& phi);
Involution involution_from_json(std::string_view text);

}  // namespace fgft
