#pragma once

#include <vector>

#include "fgft/graph.hpp"
#include "fgft/plan.hpp"
#include "fgft/symmetry.hpp"

namespace fgft {

/// Approximate GFT U_hat = Theta_1 ... Theta_J Pi: layers of Givens rotations
/// followed by a sort of the remaining diagonal.
struct ApproxGftPlan {
  int n = 0;
  std::vector<GivensLayer> layers;
  std::vector<int> perm;  ///< output k takes rotated coordinate perm[k]
  Vector eigenvalues;     ///< diagonal of U_hat^T L U_hat, ascending

  /// Givens layers then the sorting permutation, as an executable plan.
  FastGftPlan to_plan() const;
};

/// Greedy truncated Jacobi. Each layer repeatedly takes the largest
/// |off-diagonal| entry among still unused indices and annihilates it, until
/// no disjoint pair with |entry| > 1e-14 is left. Angles lie in [-pi/4, pi/4].
ApproxGftPlan truncated_jacobi(const Matrix& L, int layers);

/// (1/sqrt n) || |U_hat^T U| - I ||_F.
double delta_error(const Matrix& U_hat, const Matrix& U);

/// (1/M) sum_i sum_j (|u_j^T x_i| - |u_hat_j^T x_i|)^2 over the M columns of X.
double epsilon_error(const Matrix& U_hat, const Matrix& U, const Matrix& X);

/// The Haar levels of the fast plan rooted at phi, with every sub-GFT
/// replaced by `layers` truncated-Jacobi layers. max_depth = 1 keeps only the
/// phi stage, approximating the GFTs of G+ and G- directly. Throws
/// std::invalid_argument if g is not phi-symmetric.
FastGftPlan haar_plus_approx(const Graph& g, const Involution& phi, int layers, int max_depth = 16);

}  // namespace fgft
