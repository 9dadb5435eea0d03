#include "fgft/decompose.hpp"

#include <algorithm>
#include <numbers>

namespace fgft {

namespace {
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
}

HaarStage HaarStage::from_involution(const Involution& phi) {
  const NodePartition part = partition(phi);
  return HaarStage{phi.size(), part.pairs, part.vz};
}

Matrix butterfly_matrix(int n, int p) {
  if (p < 0 || 2 * p > n) throw std::invalid_argument("butterfly_matrix: need 0 <= 2p <= n");
  Matrix B = Matrix::Zero(n, n);
  for (int i = 0; i < p; ++i) {
    const int j = n - 1 - i;
    B(i, i) = kInvSqrt2;
    B(i, j) = kInvSqrt2;
    B(j, i) = kInvSqrt2;
    B(j, j) = -kInvSqrt2;
  }
  for (int i = p; i < n - p; ++i) B(i, i) = 1.0;
  return B;
}

Matrix haar_stage_matrix(const HaarStage& stage) {
  Matrix B = Matrix::Zero(stage.n, stage.n);
  for (const auto& [i, j] : stage.pairs) {
    B(i, i) = kInvSqrt2;
    B(j, j) = -kInvSqrt2;
    B(i, j) = kInvSqrt2;
    B(j, i) = kInvSqrt2;
  }
  for (int z : stage.passthrough) B(z, z) = 1.0;
  return B;
}

Vector haar_outputs(const HaarStage& stage, const Vector& x) {
  if (x.size() != stage.n) throw std::invalid_argument("haar_outputs: dimension mismatch");
  Vector y = x;
  for (const auto& [i, j] : stage.pairs) {
    y(i) = (x(i) + x(j)) * kInvSqrt2;
    y(j) = (x(i) - x(j)) * kInvSqrt2;
  }
  return y;
}

Matrix conjugated_laplacian(const Matrix& L, const HaarStage& stage) {
  if (L.rows() != stage.n || L.cols() != stage.n) {
    throw std::invalid_argument("conjugated_laplacian: dimension mismatch");
  }
  const Matrix B = haar_stage_matrix(stage);
  return B.transpose() * L * B;
}

double off_block_norm(const Matrix& conjugated, const HaarStage& stage) {
  std::vector<char> minus(static_cast<size_t>(stage.n), 0);
  for (const auto& [i, j] : stage.pairs) minus[j] = 1;
  double worst = 0.0;
  for (int r = 0; r < stage.n; ++r) {
    for (int c = 0; c < stage.n; ++c) {
      if (minus[r] != minus[c]) worst = std::max(worst, std::abs(conjugated(r, c)));
    }
  }
  return worst;
}

DecompositionResult decompose(const Graph& g, const Involution& phi, double tol) {
  if (!is_phi_symmetric(g, phi, tol)) {
    throw std::invalid_argument("decompose: graph is not phi-symmetric");
  }
  const NodePartition part = partition(phi);
  const Matrix W = g.weight_matrix();
  const double cutoff = tol * g.max_abs_weight();
  constexpr double sqrt2 = std::numbers::sqrt2;

  DecompositionResult out;
  out.stage = HaarStage{g.size(), part.pairs, part.vz};
  out.plus_nodes = part.vx;
  out.plus_nodes.insert(out.plus_nodes.end(), part.vz.begin(), part.vz.end());
  out.minus_nodes = part.vy;
  std::sort(out.minus_nodes.begin(), out.minus_nodes.end());

  const int px = static_cast<int>(part.vx.size());
  const int np = static_cast<int>(out.plus_nodes.size());
  auto clean = [&](double v) { return std::abs(v) <= cutoff ? 0.0 : v; };

  // G+ : V_X block gets w_ij + w_{i,phi(j)}, X-Z edges are scaled by sqrt2,
  // Z-Z edges are kept.
  Graph plus(np);
  for (int a = 0; a < np; ++a) {
    const int i = out.plus_nodes[a];
    const bool i_in_x = a < px;
    double s = g.self_loop(i);
    if (i_in_x) {
      double to_z = 0.0;
      for (int z : part.vz) to_z += W(i, z);
      s -= (sqrt2 - 1.0) * to_z;
    } else {
      double to_x = 0.0;
      for (int x : part.vx) to_x += W(i, x);
      s += (2.0 - sqrt2) * to_x;
    }
    plus.set_self_loop(a, clean(s));
    for (int b = a + 1; b < np; ++b) {
      const int j = out.plus_nodes[b];
      const bool j_in_x = b < px;
      double w = 0.0;
      if (i_in_x && j_in_x) {
        w = W(i, j) + W(i, phi[j]);
      } else if (i_in_x != j_in_x) {
        w = sqrt2 * W(i, j);
      } else {
        w = W(i, j);
      }
      plus.set_edge(a, b, clean(w));
    }
  }

  // G- : w_ij - w_{i,phi(j)}, self-loops s_i + 2 sum_X w + sum_Z w.
  const int nm = static_cast<int>(out.minus_nodes.size());
  Graph minus(nm);
  for (int a = 0; a < nm; ++a) {
    const int i = out.minus_nodes[a];
    double to_x = 0.0;
    double to_z = 0.0;
    for (int x : part.vx) to_x += W(i, x);
    for (int z : part.vz) to_z += W(i, z);
    minus.set_self_loop(a, clean(g.self_loop(i) + 2.0 * to_x + to_z));
    for (int b = a + 1; b < nm; ++b) {
      const int j = out.minus_nodes[b];
      minus.set_edge(a, b, clean(W(i, j) - W(i, phi[j])));
    }
  }

  out.g_plus = std::move(plus);
  out.g_minus = std::move(minus);
  return out;
}

std::pair<Vector, Vector> even_odd_components(const Vector& x, const Involution& phi) {
  if (x.size() != phi.size()) throw std::invalid_argument("even_odd_components: dimension mismatch");
  const HaarStage stage = HaarStage::from_involution(phi);
  const Vector haar = haar_outputs(stage, x);
  Vector even = Vector::Zero(x.size());
  Vector odd = Vector::Zero(x.size());
  for (const auto& [i, j] : stage.pairs) {
    // i in V_X carries x+, j in V_Y carries x-
    even(i) = haar(i) * kInvSqrt2;
    even(j) = haar(i) * kInvSqrt2;
    odd(i) = haar(j) * kInvSqrt2;
    odd(j) = -haar(j) * kInvSqrt2;
  }
  for (int z : stage.passthrough) even(z) = haar(z);
  return {even, odd};
}

std::vector<Component> split_components(const Graph& g) {
  const auto adj = g.adjacency();
  std::vector<int> label(static_cast<size_t>(g.size()), -1);
  std::vector<Component> comps;
  for (int s = 0; s < g.size(); ++s) {
    if (label[s] != -1) continue;
    const int id = static_cast<int>(comps.size());
    std::vector<int> members;
    std::vector<int> stack{s};
    label[s] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (const auto& [v, w] : adj[u]) {
        if (label[v] == -1) {
          label[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    Component c;
    c.graph = induced_subgraph(g, members);
    c.nodes = std::move(members);
    comps.push_back(std::move(c));
  }
  return comps;
}

}  // namespace fgft
