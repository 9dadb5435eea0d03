#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fgft/graph.hpp"
#include "fgft/symmetry.hpp"

namespace fgft {

/// Path 0-1-...-n-1 with weights[k] on edge (k, k+1); self_loops, when given,
/// must have length n.
Graph line_graph(std::span<const double> weights, std::span<const double> self_loops = {});
Graph uniform_line_graph(int n);

/// Unit-weight cycle. Throws for n < 3.
Graph cycle_graph(int n);

/// Unit-weight star with centre 0. Throws for n < 2.
Graph star_graph(int n);

/// Unit-weight complete graph. Throws for n < 2.
Graph complete_graph(int n);

/// Grids use 1-based coordinates (k, l), k the row (top to bottom) and l the
/// column, stored at flat index (k-1)*N + (l-1).
enum class GridKind {
  Bidiag6,  ///< 4-connected unit grid plus (k,l)-(k+1,l-1) edges of weight a
  ZShaped,  ///< (k,l)-(k,l+1) edges of weight 1 plus (k,l)-(k+1,l-1) edges of weight w
};

Graph grid_graph(GridKind kind, int N, double param);

enum class GridSymmetry { Centro, UpDown, LeftRight, Diagonal, AntiDiagonal };

/// Centro: (N+1-k, N+1-l). UpDown: (N+1-k, l). LeftRight: (k, N+1-l).
/// Diagonal: (l, k). AntiDiagonal: (N+1-l, N+1-k).
Involution grid_involution(GridSymmetry type, int N);

/// Unit-weight skeleton trees. 15 nodes: 0 head, 1 neck, 2 torso, 3-5 left
/// arm, 6-8 right arm, 9-11 left leg, 12-14 right leg. 25 nodes: the NTU
/// RGB+D joint hierarchy (joint j at index j-1).
Graph skeleton_graph(int variant);

/// Left/right mirror of skeleton_graph(variant).
Involution skeleton_mirror(int variant);

struct GalleryEntry {
  std::string name;
  std::string description;
  Graph graph;
  std::vector<std::pair<std::string, Involution>> known_involutions;
};

std::vector<std::string> gallery_names();
/// Throws std::invalid_argument for an unknown name.
GalleryEntry gallery_entry(std::string_view name);

/// The eight graphs of the op-count and runtime table, in table order.
std::vector<std::string> benchmark_graph_names();

}  // namespace fgft
