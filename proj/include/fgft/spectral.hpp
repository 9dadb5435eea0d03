#pragma once

#include <utility>
#include <vector>

#include "fgft/graph.hpp"

namespace fgft {

/// Eigenvalues ascending; column k of `eigenvectors` belongs to eigenvalue k.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Cyclic-by-row Jacobi eigensolver for symmetric matrices. Sweeps until the
/// off-diagonal Frobenius mass is at most tol * ||M||_F. Deterministic.
/// Throws std::invalid_argument for asymmetric input and NumericalError if
/// 100 sweeps do not suffice.
Spectrum jacobi_eigh(const Matrix& M, double tol = 1e-12);

/// Flips columns so that the first entry with |u| > 1e-8 is positive.
void normalize_column_signs(Matrix& U);

/// GFT of g: jacobi_eigh(laplacian(g)) with normalized column signs.
Spectrum gft(const Graph& g);

/// E and F of U = diag(E, F) * B_{n,p}.
struct RightHaarFactor {
  Matrix e_block;  ///< (n-p) x (n-p)
  Matrix f_block;  ///< p x p
  int p = 0;
};

struct RightHaarResult {
  RightHaarFactor factor;
  Spectrum spectrum;            ///< in the reordered node space (s1 first)
  std::vector<int> node_order;  ///< reordered node k -> original node
};

/// GFT of a k-regular bipartite graph whose eigenvectors come in sign-flipped
/// pairs (u1; u2), (u1; -u2), which factors as diag(E, F) * B_{n,n/2}.
/// Nodes are reordered so one part occupies the first n/2 indices.
/// Throws std::invalid_argument if g is not k-regular bipartite.
RightHaarResult right_haar_gft(const Graph& g);

/// Same construction for the normalized Laplacian of any loop-free bipartite
/// graph without isolated nodes; p is the size of the smaller part, which is
/// placed last. Throws std::invalid_argument otherwise.
RightHaarResult right_haar_gft_normalized(const Graph& g);

/// Largest |entry| of the off-diagonal blocks of U * B_{n,p} (rows/cols split
/// at n - p).
double right_haar_off_block(const Matrix& U, int p);

/// Half-open index ranges of eigenvalue clusters; a new cluster starts where
/// consecutive ascending eigenvalues differ by more than tol.
std::vector<std::pair<int, int>> eigenvalue_clusters(const Vector& eigenvalues, double tol = 1e-8);

/// Max over eigenvalue clusters of the sine of the largest principal angle
/// between the column spans of U1 and U2 restricted to that cluster.
double subspace_distance(const Matrix& U1, const Matrix& U2, const Vector& eigenvalues,
                         double cluster_tol = 1e-8);

}  // namespace fgft
