#include "fgft/gallery.hpp"

#include <array>
#include <functional>
#include <map>
#include <stdexcept>

namespace fgft {

Graph line_graph(std::span<const double> weights, std::span<const double> self_loops) {
  const int n = static_cast<int>(weights.size()) + 1;
  if (!self_loops.empty() && static_cast<int>(self_loops.size()) != n) {
    throw std::invalid_argument("line_graph: self_loops must have one entry per node");
  }
  Graph g(n);
  for (int k = 0; k + 1 < n; ++k) g.set_edge(k, k + 1, weights[static_cast<size_t>(k)]);
  for (int k = 0; k < static_cast<int>(self_loops.size()); ++k) g.set_self_loop(k, self_loops[static_cast<size_t>(k)]);
  return g;
}

Graph uniform_line_graph(int n) {
  if (n < 1) throw std::invalid_argument("uniform_line_graph: n must be positive");
  const std::vector<double> w(static_cast<size_t>(n - 1), 1.0);
  return line_graph(w);
}

Graph cycle_graph(int n) {
  if (n < 3) throw std::invalid_argument("cycle_graph: n must be at least 3");
  Graph g(n);
  for (int k = 0; k < n; ++k) g.set_edge(k, (k + 1) % n, 1.0);
  return g;
}

Graph star_graph(int n) {
  if (n < 2) throw std::invalid_argument("star_graph: n must be at least 2");
  Graph g(n);
  for (int k = 1; k < n; ++k) g.set_edge(0, k, 1.0);
  return g;
}

Graph complete_graph(int n) {
  if (n < 2) throw std::invalid_argument("complete_graph: n must be at least 2");
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j, 1.0);
  }
  return g;
}

namespace {

int flat(int N, int k, int l) { return (k - 1) * N + (l - 1); }

}  // namespace

Graph grid_graph(GridKind kind, int N, double param) {
  if (N < 2) throw std::invalid_argument("grid_graph: N must be at least 2");
  Graph g(N * N);
  for (int k = 1; k <= N; ++k) {
    for (int l = 1; l <= N; ++l) {
      const int v = flat(N, k, l);
      if (l < N) g.set_edge(v, flat(N, k, l + 1), 1.0);
      if (kind == GridKind::Bidiag6 && k < N) g.set_edge(v, flat(N, k + 1, l), 1.0);
      if (k < N && l > 1) g.set_edge(v, flat(N, k + 1, l - 1), param);
    }
  }
  return g;
}

Involution grid_involution(GridSymmetry type, int N) {
  if (N < 1) throw std::invalid_argument("grid_involution: N must be positive");
  std::vector<int> phi(static_cast<size_t>(N * N));
  for (int k = 1; k <= N; ++k) {
    for (int l = 1; l <= N; ++l) {
      int k2 = k;
      int l2 = l;
      switch (type) {
        case GridSymmetry::Centro: k2 = N + 1 - k; l2 = N + 1 - l; break;
        case GridSymmetry::UpDown: k2 = N + 1 - k; break;
        case GridSymmetry::LeftRight: l2 = N + 1 - l; break;
        case GridSymmetry::Diagonal: k2 = l; l2 = k; break;
        case GridSymmetry::AntiDiagonal: k2 = N + 1 - l; l2 = N + 1 - k; break;
      }
      phi[static_cast<size_t>(flat(N, k, l))] = flat(N, k2, l2);
    }
  }
  return Involution(std::move(phi));
}

namespace {

constexpr std::array<std::pair<int, int>, 14> kSkeleton15 = {{
    {0, 1}, {1, 2}, {1, 3}, {3, 4}, {4, 5}, {1, 6}, {6, 7},
    {7, 8}, {2, 9}, {9, 10}, {10, 11}, {2, 12}, {12, 13}, {13, 14},
}};

// 1-based joint pairs of the NTU RGB+D skeleton.
constexpr std::array<std::pair<int, int>, 24> kSkeleton25 = {{
    {1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},   {7, 6},   {8, 7},
    {9, 21},  {10, 9},  {11, 10}, {12, 11}, {13, 1},  {14, 13}, {15, 14}, {16, 15},
    {17, 1},  {18, 17}, {19, 18}, {20, 19}, {22, 23}, {23, 8},  {24, 25}, {25, 12},
}};

}  // namespace

Graph skeleton_graph(int variant) {
  if (variant == 15) {
    Graph g(15);
    for (const auto& [a, b] : kSkeleton15) g.set_edge(a, b, 1.0);
    return g;
  }
  if (variant == 25) {
    Graph g(25);
    for (const auto& [a, b] : kSkeleton25) g.set_edge(a - 1, b - 1, 1.0);
    return g;
  }
  throw std::invalid_argument("skeleton_graph: variant must be 15 or 25");
}

Involution skeleton_mirror(int variant) {
  std::vector<std::pair<int, int>> swaps;
  int n = 0;
  if (variant == 15) {
    n = 15;
    swaps = {{3, 6}, {4, 7}, {5, 8}, {9, 12}, {10, 13}, {11, 14}};
  } else if (variant == 25) {
    n = 25;
    for (int j = 5; j <= 8; ++j) swaps.emplace_back(j - 1, j + 3);
    for (int j = 13; j <= 16; ++j) swaps.emplace_back(j - 1, j + 3);
    swaps.emplace_back(21, 23);
    swaps.emplace_back(22, 24);
  } else {
    throw std::invalid_argument("skeleton_mirror: variant must be 15 or 25");
  }
  std::vector<int> phi(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) phi[static_cast<size_t>(i)] = i;
  for (const auto& [a, b] : swaps) {
    phi[static_cast<size_t>(a)] = b;
    phi[static_cast<size_t>(b)] = a;
  }
  return Involution(std::move(phi));
}

namespace {

Involution reversal(int n) {
  std::vector<int> phi(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) phi[static_cast<size_t>(i)] = n - 1 - i;
  return Involution(std::move(phi));
}

Involution transposition(int n, int a, int b) {
  std::vector<int> phi(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) phi[static_cast<size_t>(i)] = i;
  phi[static_cast<size_t>(a)] = b;
  phi[static_cast<size_t>(b)] = a;
  return Involution(std::move(phi));
}

GalleryEntry line_entry(int n) {
  return {"line" + std::to_string(n), "uniform path, GFT is the DCT-II", uniform_line_graph(n),
          {{"reversal", reversal(n)}}};
}

GalleryEntry cycle_entry(int n) {
  return {"cycle" + std::to_string(n), "unit-weight cycle", cycle_graph(n), {{"reversal", reversal(n)}}};
}

GalleryEntry star_entry(int n) {
  GalleryEntry e{"star" + std::to_string(n), "unit-weight star, centre 0", star_graph(n), {}};
  for (int a = 1; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      e.known_involutions.emplace_back("swap" + std::to_string(a) + "_" + std::to_string(b), transposition(n, a, b));
    }
  }
  return e;
}

GalleryEntry complete_entry(int n) {
  GalleryEntry e{"complete" + std::to_string(n), "unit-weight complete graph", complete_graph(n), {}};
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      e.known_involutions.emplace_back("swap" + std::to_string(a) + "_" + std::to_string(b), transposition(n, a, b));
    }
  }
  return e;
}

GalleryEntry bidiag_entry(int N) {
  return {"bidiag" + std::to_string(N * N),
          std::to_string(N) + "x" + std::to_string(N) + " 6-connected grid, symmetric about both diagonals, a = 0.5",
          grid_graph(GridKind::Bidiag6, N, 0.5),
          {{"diagonal", grid_involution(GridSymmetry::Diagonal, N)},
           {"antidiagonal", grid_involution(GridSymmetry::AntiDiagonal, N)},
           {"centro", grid_involution(GridSymmetry::Centro, N)}}};
}

GalleryEntry zshaped_entry(int N) {
  return {"zshaped" + std::to_string(N * N),
          std::to_string(N) + "x" + std::to_string(N) + " z-shaped grid, w = 2",
          grid_graph(GridKind::ZShaped, N, 2.0),
          {{"centro", grid_involution(GridSymmetry::Centro, N)}}};
}

GalleryEntry skeleton_entry(int variant) {
  return {"skeleton" + std::to_string(variant), std::to_string(variant) + "-node human skeleton tree",
          skeleton_graph(variant), {{"mirror", skeleton_mirror(variant)}}};
}

const std::vector<std::pair<std::string, std::function<GalleryEntry()>>>& registry() {
  static const std::vector<std::pair<std::string, std::function<GalleryEntry()>>> entries = {
      {"line4", [] { return line_entry(4); }},
      {"line8", [] { return line_entry(8); }},
      {"cycle4", [] { return cycle_entry(4); }},
      {"cycle12", [] { return cycle_entry(12); }},
      {"cycle80", [] { return cycle_entry(80); }},
      {"star4", [] { return star_entry(4); }},
      {"star8", [] { return star_entry(8); }},
      {"complete4", [] { return complete_entry(4); }},
      {"bidiag16", [] { return bidiag_entry(4); }},
      {"bidiag64", [] { return bidiag_entry(8); }},
      {"zshaped16", [] { return zshaped_entry(4); }},
      {"zshaped64", [] { return zshaped_entry(8); }},
      {"skeleton15", [] { return skeleton_entry(15); }},
      {"skeleton25", [] { return skeleton_entry(25); }},
  };
  return entries;
}

}  // namespace

std::vector<std::string> gallery_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : registry()) names.push_back(name);
  return names;
}

GalleryEntry gallery_entry(std::string_view name) {
  for (const auto& [key, make] : registry()) {
    if (key == name) return make();
  }
  throw std::invalid_argument("unknown gallery graph '" + std::string(name) + "'");
}

std::vector<std::string> benchmark_graph_names() {
  return {"cycle12", "cycle80", "bidiag16", "bidiag64", "zshaped16", "zshaped64", "skeleton15", "skeleton25"};
}

}  // namespace fgft
