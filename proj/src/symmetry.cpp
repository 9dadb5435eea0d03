#include "fgft/symmetry.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include <json.hpp>

namespace fgft {

bool is_involution(std::span<const int> phi) {
  const int n = static_cast<int>(phi.size());
  std::vector<char> seen(phi.size(), 0);
  for (int v : phi) {
    if (v < 0 || v >= n || seen[v]) throw std::invalid_argument("is_involution: not a permutation");
    seen[v] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (phi[phi[i]] != i) return false;
  }
  return true;
}

Involution::Involution(std::vector<int> phi) : phi_(std::move(phi)) {
  if (!is_involution(phi_)) throw std::invalid_argument("Involution: phi(phi(i)) != i");
}

Involution Involution::identity(int n) {
  std::vector<int> id(static_cast<size_t>(n));
  std::iota(id.begin(), id.end(), 0);
  return Involution(std::move(id));
}

int Involution::pair_count() const {
  int moved = 0;
  for (int i = 0; i < size(); ++i) moved += (phi_[i] != i);
  return moved / 2;
}

NodePartition partition(const Involution& phi) {
  NodePartition part;
  for (int i = 0; i < phi.size(); ++i) {
    const int j = phi[i];
    if (j == i) {
      part.vz.push_back(i);
    } else if (i < j) {
      part.vx.push_back(i);
      part.vy.push_back(j);
      part.pairs.emplace_back(i, j);
    }
  }
  return part;
}

bool is_phi_symmetric(const Graph& g, const Involution& phi, double tol) {
  if (phi.size() != g.size()) return false;
  for (int i = 0; i < g.size(); ++i) {
    if (!weights_equal(g.self_loop(i), g.self_loop(phi[i]), tol)) return false;
  }
  // Every stored edge must have an equal-weight image, and since phi is a
  // bijection on unordered pairs that also rules out images of non-edges.
  for (const auto& [key, w] : g.edges()) {
    if (!weights_equal(w, g.weight(phi[key.first], phi[key.second]), tol)) return false;
  }
  return true;
}

void sort_involutions(std::vector<Involution>& list) {
  std::sort(list.begin(), list.end(), [](const Involution& a, const Involution& b) {
    const int pa = a.pair_count();
    const int pb = b.pair_count();
    if (pa != pb) return pa > pb;
    return a.map() < b.map();
  });
}

namespace {

struct NodeSignature {
  double degree = 0.0;
  double self_loop = 0.0;
  std::vector<double> incident;  // sorted
};

bool compatible(const NodeSignature& a, const NodeSignature& b, double tol) {
  if (a.incident.size() != b.incident.size()) return false;
  if (!weights_equal(a.degree, b.degree, tol) || !weights_equal(a.self_loop, b.self_loop, tol)) {
    return false;
  }
  for (size_t k = 0; k < a.incident.size(); ++k) {
    if (!weights_equal(a.incident[k], b.incident[k], tol)) return false;
  }
  return true;
}

// Nodes in BFS order, so every node after a component's first one has an
// already-placed neighbour; this makes the consistency checks bite early.
std::vector<int> bfs_order(const Graph& g) {
  const auto adj = g.adjacency();
  std::vector<int> order;
  std::vector<char> seen(static_cast<size_t>(g.size()), 0);
  for (int s = 0; s < g.size(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      order.push_back(u);
      for (const auto& [v, w] : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
  }
  return order;
}

class PairingSearch {
 public:
  PairingSearch(const Graph& g, std::uint64_t budget, double tol)
      : n_(g.size()), W_(g.weight_matrix()), budget_(budget), tol_(tol) {
    const auto adj = g.adjacency();
    std::vector<NodeSignature> sig(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      sig[i].self_loop = g.self_loop(i);
      for (const auto& [j, w] : adj[i]) {
        sig[i].degree += w;
        sig[i].incident.push_back(w);
      }
      std::sort(sig[i].incident.begin(), sig[i].incident.end());
    }
    candidates_.resize(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (j != i && compatible(sig[i], sig[j], tol_)) candidates_[i].push_back(j);
      }
    }
    order_ = bfs_order(g);
    phi_.assign(static_cast<size_t>(n_), -1);
  }

  InvolutionSearchResult run() {
    recurse(0);
    sort_involutions(result_.involutions);
    return std::move(result_);
  }

 private:
  bool consistent(int i, int j) const {
    for (int a : assigned_) {
      const int b = phi_[a];
      if (!weights_equal(W_(i, a), W_(j, b), tol_)) return false;
      if (!weights_equal(W_(j, a), W_(i, b), tol_)) return false;
    }
    return true;
  }

  bool try_assign(int idx, int i, int j) {
    if (++result_.extensions > budget_) {
      result_.truncated = true;
      return false;
    }
    if (!consistent(i, j)) return true;
    phi_[i] = j;
    phi_[j] = i;
    assigned_.push_back(i);
    if (j != i) assigned_.push_back(j);
    const bool keep_going = recurse(idx + 1);
    assigned_.pop_back();
    if (j != i) assigned_.pop_back();
    phi_[i] = -1;
    phi_[j] = -1;
    return keep_going;
  }

  // Returns false once the budget is exhausted.
  bool recurse(int idx) {
    while (idx < n_ && phi_[order_[idx]] != -1) ++idx;
    if (idx == n_) {
      Involution found(phi_);
      if (!found.is_identity()) result_.involutions.push_back(std::move(found));
      return true;
    }
    const int i = order_[idx];
    // Pairings first so that high-p_phi candidates surface early under a budget.
    for (int j : candidates_[i]) {
      if (phi_[j] != -1) continue;
      if (!try_assign(idx, i, j)) return false;
    }
    return try_assign(idx, i, i);
  }

  int n_;
  Matrix W_;
  std::uint64_t budget_;
  double tol_;
  std::vector<std::vector<int>> candidates_;
  std::vector<int> order_;
  std::vector<int> phi_;
  std::vector<int> assigned_;
  InvolutionSearchResult result_;
};

}  // namespace

InvolutionSearchResult search_involutions(const Graph& g, std::uint64_t budget, double tol) {
  return PairingSearch(g, budget, tol).run();
}

bool is_tree(const Graph& g) {
  if (g.size() == 0 || g.edge_count() != g.size() - 1) return false;
  // n - 1 edges plus connectivity
  const auto adj = g.adjacency();
  std::vector<char> seen(static_cast<size_t>(g.size()), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++count;
    for (const auto& [v, w] : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return count == g.size();
}

namespace {

// Rooted tree with AHU-style canonical codes. A code identifies a rooted
// subtree up to isomorphism, including the self-loop on every node and the
// weight on every edge.
class RootedTree {
 public:
  using Key = std::pair<double, std::vector<std::pair<double, int>>>;

  RootedTree(const Graph& g, int root) : adj_(g.adjacency()), g_(g) {
    const int n = g.size();
    parent_.assign(static_cast<size_t>(n), -1);
    parent_weight_.assign(static_cast<size_t>(n), 0.0);
    children_.resize(static_cast<size_t>(n));
    std::vector<int> order{root};
    std::vector<char> seen(static_cast<size_t>(n), 0);
    seen[root] = 1;
    for (size_t head = 0; head < order.size(); ++head) {
      const int u = order[head];
      for (const auto& [v, w] : adj_[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        parent_[v] = u;
        parent_weight_[v] = w;
        children_[u].push_back(v);
        order.push_back(v);
      }
    }
    code_.assign(static_cast<size_t>(n), -1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) code_[*it] = code_of(*it, -1);
    // children sorted by (edge weight, code) so equal branches are adjacent
    for (auto& ch : children_) {
      std::sort(ch.begin(), ch.end(), [&](int a, int b) { return branch_key(a) < branch_key(b); });
    }
  }

  // Code of `v`'s subtree with child `skip` removed (-1 keeps all children).
  int code_of(int v, int skip) {
    Key key;
    key.first = g_.self_loop(v);
    for (int c : children_[v]) {
      if (c != skip) key.second.emplace_back(parent_weight_[c], code_[c]);
    }
    std::sort(key.second.begin(), key.second.end());
    auto [it, inserted] = ids_.try_emplace(std::move(key), static_cast<int>(ids_.size()));
    return it->second;
  }

  std::pair<double, int> branch_key(int v) const { return {parent_weight_[v], code_[v]}; }
  int code(int v) const { return code_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }

  // Writes the isomorphism between equal-code subtrees rooted at a and b into phi.
  void map_subtrees(int a, int b, std::vector<int>& phi, int skip_a = -1, int skip_b = -1) const {
    std::vector<std::pair<int, int>> stack{{a, b}};
    bool top = true;
    while (!stack.empty()) {
      const auto [x, y] = stack.back();
      stack.pop_back();
      phi[x] = y;
      phi[y] = x;
      std::vector<int> cx;
      std::vector<int> cy;
      for (int c : children_[x]) {
        if (!(top && c == skip_a)) cx.push_back(c);
      }
      for (int c : children_[y]) {
        if (!(top && c == skip_b)) cy.push_back(c);
      }
      top = false;
      for (size_t k = 0; k < cx.size(); ++k) stack.emplace_back(cx[k], cy[k]);
    }
  }

 private:
  std::vector<std::vector<std::pair<int, double>>> adj_;
  const Graph& g_;
  std::vector<int> parent_;
  std::vector<double> parent_weight_;
  std::vector<std::vector<int>> children_;
  std::vector<int> code_;
  std::map<Key, int> ids_;
};

std::vector<int> tree_centers(const Graph& g) {
  const int n = g.size();
  if (n <= 2) {
    std::vector<int> all(static_cast<size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  const auto adj = g.adjacency();
  std::vector<int> deg(static_cast<size_t>(n));
  std::vector<int> leaves;
  for (int i = 0; i < n; ++i) {
    deg[i] = static_cast<int>(adj[i].size());
    if (deg[i] <= 1) leaves.push_back(i);
  }
  int remaining = n;
  while (remaining > 2) {
    remaining -= static_cast<int>(leaves.size());
    std::vector<int> next;
    for (int leaf : leaves) {
      for (const auto& [v, w] : adj[leaf]) {
        if (--deg[v] == 1) next.push_back(v);
      }
    }
    leaves = std::move(next);
  }
  std::sort(leaves.begin(), leaves.end());
  return leaves;
}

}  // namespace

std::vector<Involution> search_involutions_tree(const Graph& g, double tol) {
  if (!is_tree(g)) throw std::invalid_argument("search_involutions_tree: graph is not a tree");
  const int n = g.size();
  if (n < 2) return {};

  const auto centers = tree_centers(g);
  const int root = centers.front();
  RootedTree tree(g, root);

  std::vector<int> identity(static_cast<size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  std::set<std::vector<int>> found;

  // Two centres: swap the halves on either side of the central edge.
  bool halves_swap = false;
  if (centers.size() == 2) {
    const int other = centers[1];
    if (tree.code_of(root, other) == tree.code(other)) {
      std::vector<int> phi = identity;
      tree.map_subtrees(root, other, phi, other, -1);
      found.insert(phi);
      halves_swap = true;
    }
  }

  // Single swaps of neighbouring equal branches under a common root.
  for (int v = 0; v < n; ++v) {
    const auto& ch = tree.children(v);
    for (size_t k = 0; k + 1 < ch.size(); ++k) {
      if (tree.branch_key(ch[k]) != tree.branch_key(ch[k + 1])) continue;
      std::vector<int> phi = identity;
      tree.map_subtrees(ch[k], ch[k + 1], phi);
      found.insert(std::move(phi));
    }
  }

  // Maximal combination: pair up equal branches everywhere, descending only
  // into branches that stay fixed.
  if (!halves_swap) {
    std::vector<int> phi = identity;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      const auto& ch = tree.children(v);
      size_t k = 0;
      while (k < ch.size()) {
        size_t end = k + 1;
        while (end < ch.size() && tree.branch_key(ch[end]) == tree.branch_key(ch[k])) ++end;
        size_t m = k;
        for (; m + 1 < end; m += 2) tree.map_subtrees(ch[m], ch[m + 1], phi);
        if (m < end) stack.push_back(ch[m]);
        k = end;
      }
    }
    if (phi != identity) found.insert(std::move(phi));
  }

  std::vector<Involution> result;
  for (const auto& phi : found) {
    Involution inv(phi);
    if (is_phi_symmetric(g, inv, tol)) result.push_back(std::move(inv));
  }
  sort_involutions(result);
  return result;
}

std::uint64_t involution_count(int n) {
  if (n < 0) throw std::invalid_argument("involution_count: negative n");
  // T(n) = T(n-1) + (n-1) T(n-2), equivalent to the closed-form sum.
  std::uint64_t prev = 1;  // T(0)
  std::uint64_t cur = 1;   // T(1)
  if (n <= 1) return 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (int m = 2; m <= n; ++m) {
    const auto k = static_cast<std::uint64_t>(m - 1);
    if (prev != 0 && k > kMax / prev) throw std::overflow_error("involution_count: overflow");
    const std::uint64_t term = k * prev;
    if (term > kMax - cur) throw std::overflow_error("involution_count: overflow");
    prev = cur;
    cur += term;
  }
  return cur;
}

std::string involution_to_json(const Involution& phi) {
  nlohmann::json j;
  j["phi"] = phi.map();
  return j.dump();
}

Involution involution_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return Involution(j.at("phi").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("involution JSON: ") + e.what());
  }
}

}  // namespace fgft
