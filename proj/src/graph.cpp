#include "fgft/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace fgft {

Graph::Graph(int n) : n_(n), self_loops_(static_cast<size_t>(n), 0.0) {
  if (n < 0) throw std::invalid_argument("Graph: negative node count");
}

void Graph::check_index(int i) const {
  if (i < 0 || i >= n_) {
    throw std::out_of_range("Graph: node index " + std::to_string(i) + " out of range");
  }
}

void Graph::set_edge(int i, int j, double w) {
  check_index(i);
  check_index(j);
  if (i == j) throw std::invalid_argument("Graph: self-loops are not edges");
  if (!std::isfinite(w)) throw std::invalid_argument("Graph: non-finite weight");
  const auto key = std::minmax(i, j);
  if (w == 0.0) {
    edges_.erase(key);
  } else {
    edges_[key] = w;
  }
}

void Graph::set_self_loop(int i, double s) {
  check_index(i);
  if (!std::isfinite(s)) throw std::invalid_argument("Graph: non-finite self-loop");
  self_loops_[static_cast<size_t>(i)] = s;
}

double Graph::weight(int i, int j) const {
  if (i == j) return 0.0;
  auto it = edges_.find(std::minmax(i, j));
  return it == edges_.end() ? 0.0 : it->second;
}

bool Graph::has_self_loops() const {
  return std::any_of(self_loops_.begin(), self_loops_.end(), [](double s) { return s != 0.0; });
}

double Graph::degree(int i) const {
  check_index(i);
  double d = 0.0;
  for (const auto& [key, w] : edges_) {
    if (key.first == i || key.second == i) d += w;
  }
  return d;
}

std::vector<std::vector<std::pair<int, double>>> Graph::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(n_));
  for (const auto& [key, w] : edges_) {
    adj[static_cast<size_t>(key.first)].emplace_back(key.second, w);
    adj[static_cast<size_t>(key.second)].emplace_back(key.first, w);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

Matrix Graph::weight_matrix() const {
  Matrix W = Matrix::Zero(n_, n_);
  for (const auto& [key, w] : edges_) {
    W(key.first, key.second) = w;
    W(key.second, key.first) = w;
  }
  return W;
}

double Graph::max_abs_weight() const {
  double m = 0.0;
  for (const auto& [key, w] : edges_) m = std::max(m, std::abs(w));
  for (double s : self_loops_) m = std::max(m, std::abs(s));
  return m;
}

bool approx_equal(const Graph& a, const Graph& b, double tol) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (!weights_equal(a.self_loop(i), b.self_loop(i), tol)) return false;
  }
  for (const auto& [key, w] : a.edges()) {
    if (!weights_equal(w, b.weight(key.first, key.second), tol)) return false;
  }
  for (const auto& [key, w] : b.edges()) {
    if (!weights_equal(w, a.weight(key.first, key.second), tol)) return false;
  }
  return true;
}

Matrix laplacian(const Graph& g) {
  const int n = g.size();
  Matrix L = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) L(i, i) = g.self_loop(i);
  for (const auto& [key, w] : g.edges()) {
    const auto [i, j] = key;
    L(i, j) = -w;
    L(j, i) = -w;
    L(i, i) += w;
    L(j, j) += w;
  }
  return L;
}

Graph graph_from_laplacian(const Matrix& L, double zero_tol) {
  if (L.rows() != L.cols()) throw std::invalid_argument("graph_from_laplacian: matrix not square");
  const int n = static_cast<int>(L.rows());
  const double scale = L.cwiseAbs().maxCoeff();
  const double cutoff = n == 0 ? 0.0 : zero_tol * scale;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(L(i, j) - L(j, i)) > cutoff) {
        throw std::invalid_argument("graph_from_laplacian: matrix not symmetric");
      }
    }
  }
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    double s = L(i, i);
    for (int j = 0; j < n; ++j) {
      if (j != i) s += L(i, j);
    }
    if (std::abs(s) > cutoff) g.set_self_loop(i, s);
    for (int j = i + 1; j < n; ++j) {
      const double w = -L(i, j);
      if (std::abs(w) > cutoff) g.set_edge(i, j, w);
    }
  }
  return g;
}

Matrix normalized_laplacian(const Graph& g) {
  Matrix L = laplacian(g);
  Vector inv_sqrt(g.size());
  for (int i = 0; i < g.size(); ++i) {
    if (!(L(i, i) > 0.0)) {
      throw std::invalid_argument("normalized_laplacian: node " + std::to_string(i) +
                                  " has non-positive degree");
    }
    inv_sqrt(i) = 1.0 / std::sqrt(L(i, i));
  }
  return inv_sqrt.asDiagonal() * L * inv_sqrt.asDiagonal();
}

std::optional<Bipartition> is_bipartite(const Graph& g) {
  const int n = g.size();
  const auto adj = g.adjacency();
  std::vector<int> colour(static_cast<size_t>(n), -1);
  for (int start = 0; start < n; ++start) {
    if (colour[start] != -1) continue;
    colour[start] = 0;
    std::queue<int> q;
    q.push(start);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& [v, w] : adj[u]) {
        if (colour[v] == -1) {
          colour[v] = 1 - colour[u];
          q.push(v);
        } else if (colour[v] == colour[u]) {
          return std::nullopt;
        }
      }
    }
  }
  Bipartition parts;
  for (int i = 0; i < n; ++i) (colour[i] == 0 ? parts.s1 : parts.s2).push_back(i);
  return parts;
}

std::optional<std::pair<Bipartition, double>> is_k_regular_bipartite(const Graph& g, double tol) {
  if (g.size() == 0 || g.has_self_loops()) return std::nullopt;
  auto parts = is_bipartite(g);
  if (!parts || parts->s1.size() != parts->s2.size()) return std::nullopt;
  const double k = g.degree(0);
  for (int i = 1; i < g.size(); ++i) {
    if (!weights_equal(g.degree(i), k, tol)) return std::nullopt;
  }
  return std::make_pair(std::move(*parts), k);
}

double quadratic_form(const Matrix& L, std::span<const double> f) {
  if (static_cast<Eigen::Index>(f.size()) != L.rows()) {
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  }
  Eigen::Map<const Vector> x(f.data(), static_cast<Eigen::Index>(f.size()));
  return x.dot(L * x);
}

double quadratic_form(const Graph& g, std::span<const double> f) {
  if (static_cast<int>(f.size()) != g.size()) {
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  }
  double q = 0.0;
  for (const auto& [key, w] : g.edges()) {
    const double d = f[key.first] - f[key.second];
    q += w * d * d;
  }
  for (int k = 0; k < g.size(); ++k) q += g.self_loop(k) * f[k] * f[k];
  return q;
}

Graph induced_subgraph(const Graph& g, std::span<const int> nodes) {
  const int m = static_cast<int>(nodes.size());
  std::vector<int> local(static_cast<size_t>(g.size()), -1);
  for (int k = 0; k < m; ++k) local[nodes[k]] = k;
  Graph sub(m);
  for (int k = 0; k < m; ++k) sub.set_self_loop(k, g.self_loop(nodes[k]));
  for (const auto& [key, w] : g.edges()) {
    const int a = local[key.first];
    const int b = local[key.second];
    if (a >= 0 && b >= 0) sub.set_edge(a, b, w);
  }
  return sub;
}

Graph permute_nodes(const Graph& g, std::span<const int> order) {
  if (static_cast<int>(order.size()) != g.size()) {
    throw std::invalid_argument("permute_nodes: order length mismatch");
  }
  return induced_subgraph(g, order);
}

std::string graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.size();
  j["edges"] = nlohmann::json::array();
  for (const auto& [key, w] : g.edges()) j["edges"].push_back({key.first, key.second, w});
  j["self_loops"] = nlohmann::json::array();
  for (int i = 0; i < g.size(); ++i) {
    if (g.self_loop(i) != 0.0) j["self_loops"].push_back({i, g.self_loop(i)});
  }
  return j.dump();
}

Graph graph_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Graph g(j.at("n").get<int>());
    for (const auto& e : j.at("edges")) {
      if (e.size() != 3) throw std::invalid_argument("edge entries must be [i, j, w]");
      const int a = e[0].get<int>();
      const int b = e[1].get<int>();
      g.set_edge(a, b, e[2].get<double>());
    }
    if (j.contains("self_loops")) {
      for (const auto& s : j.at("self_loops")) {
        if (s.size() != 2) throw std::invalid_argument("self-loop entries must be [i, s]");
        g.set_self_loop(s[0].get<int>(), s[1].get<double>());
      }
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("graph JSON: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(std::string("graph JSON: ") + e.what());
  }
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return graph_from_json(buf.str());
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write graph file '" + path + "'");
  out << graph_to_json(g) << '\n';
}

}  // namespace fgft
