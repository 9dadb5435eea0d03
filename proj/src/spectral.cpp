#include "fgft/spectral.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "fgft/decompose.hpp"

namespace fgft {

namespace {

double off_diagonal_norm(const Matrix& A) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      if (r != c) sum += A(r, c) * A(r, c);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

Spectrum jacobi_eigh(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) throw std::invalid_argument("jacobi_eigh: matrix not square");
  const Eigen::Index n = M.rows();
  const double scale = n == 0 ? 0.0 : std::max(1.0, M.cwiseAbs().maxCoeff());
  if (n > 0 && (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("jacobi_eigh: matrix not symmetric");
  }
  Matrix A = 0.5 * (M + M.transpose());
  Matrix V = Matrix::Identity(n, n);
  const double norm = A.norm();

  bool converged = n <= 1 || norm == 0.0;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    if (off_diagonal_norm(A) <= tol * norm) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    if (off_diagonal_norm(A) > tol * norm) throw NumericalError("jacobi_eigh: no convergence after 100 sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
  Spectrum out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = A(order[k], order[k]);
    out.eigenvectors.col(k) = V.col(order[k]);
  }
  return out;
}

void normalize_column_signs(Matrix& U) {
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    for (Eigen::Index r = 0; r < U.rows(); ++r) {
      if (std::abs(U(r, c)) > 1e-8) {
        if (U(r, c) < 0.0) U.col(c) *= -1.0;
        break;
      }
    }
  }
}

Spectrum gft(const Graph& g) {
  Spectrum s = jacobi_eigh(laplacian(g));
  normalize_column_signs(s.eigenvectors);
  return s;
}

std::vector<std::pair<int, int>> eigenvalue_clusters(const Vector& eigenvalues, double tol) {
  std::vector<std::pair<int, int>> clusters;
  const int n = static_cast<int>(eigenvalues.size());
  int start = 0;
  for (int k = 1; k <= n; ++k) {
    if (k == n || eigenvalues(k) - eigenvalues(k - 1) > tol) {
      clusters.emplace_back(start, k);
      start = k;
    }
  }
  return clusters;
}

double right_haar_off_block(const Matrix& U, int p) {
  const Eigen::Index n = U.rows();
  const Matrix UB = U * butterfly_matrix(static_cast<int>(n), p);
  const Eigen::Index m = n - p;
  double worst = 0.0;
  if (m > 0 && p > 0) {
    worst = std::max(UB.topRightCorner(m, p).cwiseAbs().maxCoeff(),
                     UB.bottomLeftCorner(p, m).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

// Eigenbasis of a symmetric M satisfying F M F = c I - M, F = diag(I_{n-p}, -I_p),
// arranged so that column t and column n-1-t are (u1; u2) and (u1; -u2).
Spectrum paired_eigenbasis(const Matrix& M, int p, double c) {
  const int n = static_cast<int>(M.rows());
  const Spectrum base = jacobi_eigh(M);
  const double cluster_tol = 1e-8 * std::max(1.0, std::abs(c));
  const auto clusters = eigenvalue_clusters(base.eigenvalues, cluster_tol);

  Vector flip = Vector::Ones(n);
  flip.tail(p).setConstant(-1.0);

  Spectrum out{base.eigenvalues, Matrix::Zero(n, n)};
  for (const auto& [a, b] : clusters) {
    const int mirror_a = n - b;
    if (a < mirror_a) {
      const bool has_mirror = std::find(clusters.begin(), clusters.end(),
                                        std::make_pair(mirror_a, n - a)) != clusters.end();
      if (!has_mirror) throw NumericalError("right Haar: spectrum is not mirror-symmetric");
      for (int t = a; t < b; ++t) {
        out.eigenvectors.col(t) = base.eigenvectors.col(t);
        out.eigenvectors.col(n - 1 - t) = flip.cwiseProduct(base.eigenvectors.col(t));
      }
    } else if (a == mirror_a) {
      // Self-mirrored cluster: split into vectors supported on either part.
      const int m = b - a;
      const Matrix Q = base.eigenvectors.middleCols(a, m);
      const Matrix S = Q.transpose() * flip.asDiagonal() * Q;
      const Spectrum split = jacobi_eigh(0.5 * (S + S.transpose()));
      const Matrix R = Q * split.eigenvectors;
      std::vector<int> neg;
      std::vector<int> pos;
      for (int k = 0; k < m; ++k) (split.eigenvalues(k) < 0.0 ? neg : pos).push_back(k);
      const int pairs_here = (m - (n - 2 * p)) / 2;
      if (static_cast<int>(neg.size()) != pairs_here ||
          static_cast<int>(pos.size()) != pairs_here + (n - 2 * p)) {
        throw NumericalError("right Haar: middle eigenspace does not split evenly");
      }
      const double r = 1.0 / std::numbers::sqrt2;
      for (int t = 0; t < pairs_here; ++t) {
        out.eigenvectors.col(a + t) = r * (R.col(pos[t]) + R.col(neg[t]));
        out.eigenvectors.col(b - 1 - t) = r * (R.col(pos[t]) - R.col(neg[t]));
      }
      for (int t = pairs_here; t < static_cast<int>(pos.size()); ++t) {
        out.eigenvectors.col(a + t) = R.col(pos[t]);
      }
    }
  }
  return out;
}

RightHaarResult finish_right_haar(const Matrix& M, std::vector<int> order, int p, double c) {
  RightHaarResult res;
  res.node_order = std::move(order);
  res.spectrum = paired_eigenbasis(M, p, c);
  const int n = static_cast<int>(M.rows());
  const Matrix UB = res.spectrum.eigenvectors * butterfly_matrix(n, p);
  res.factor.p = p;
  res.factor.e_block = UB.topLeftCorner(n - p, n - p);
  res.factor.f_block = UB.bottomRightCorner(p, p);
  if (right_haar_off_block(res.spectrum.eigenvectors, p) > 1e-10) {
    throw NumericalError("right Haar: factor is not block diagonal");
  }
  return res;
}

}  // namespace

RightHaarResult right_haar_gft(const Graph& g) {
  const auto rbg = is_k_regular_bipartite(g);
  if (!rbg) throw std::invalid_argument("right_haar_gft: graph is not k-regular bipartite");
  const auto& [parts, k] = *rbg;
  std::vector<int> order = parts.s1;
  order.insert(order.end(), parts.s2.begin(), parts.s2.end());
  const Matrix L = laplacian(permute_nodes(g, order));
  return finish_right_haar(L, std::move(order), g.size() / 2, 2.0 * k);
}

RightHaarResult right_haar_gft_normalized(const Graph& g) {
  if (g.has_self_loops()) throw std::invalid_argument("right_haar_gft_normalized: self-loops present");
  auto parts = is_bipartite(g);
  if (!parts) throw std::invalid_argument("right_haar_gft_normalized: graph is not bipartite");
  if (parts->s1.size() < parts->s2.size()) std::swap(parts->s1, parts->s2);
  std::vector<int> order = parts->s1;
  order.insert(order.end(), parts->s2.begin(), parts->s2.end());
  const Matrix N = normalized_laplacian(permute_nodes(g, order));
  return finish_right_haar(N, std::move(order), static_cast<int>(parts->s2.size()), 2.0);
}

double subspace_distance(const Matrix& U1, const Matrix& U2, const Vector& eigenvalues,
                         double cluster_tol) {
  if (U1.rows() != U2.rows() || U1.cols() != U2.cols() || U1.cols() != eigenvalues.size()) {
    throw std::invalid_argument("subspace_distance: dimension mismatch");
  }
  double worst = 0.0;
  for (const auto& [a, b] : eigenvalue_clusters(eigenvalues, cluster_tol)) {
    const Matrix C1 = U1.middleCols(a, b - a);
    const Matrix C2 = U2.middleCols(a, b - a);
    // Residual of projecting one span onto the other; its spectral norm is
    // the sine of the largest principal angle.
    for (const Matrix& R : {Matrix(C2 - C1 * (C1.transpose() * C2)),
                            Matrix(C1 - C2 * (C2.transpose() * C1))}) {
      const Matrix G = R.transpose() * R;
      const Spectrum s = jacobi_eigh(0.5 * (G + G.transpose()));
      worst = std::max(worst, std::sqrt(std::max(0.0, s.eigenvalues.maxCoeff())));
    }
  }
  return worst;
}

}  // namespace fgft
