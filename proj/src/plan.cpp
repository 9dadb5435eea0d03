#include "fgft/plan.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fgft/baseline.hpp"
#include "fgft/decompose.hpp"
#include "fgft/spectral.hpp"

namespace fgft {

namespace {

bool scales_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

class Planner {
 public:
  Planner(int n, const PlanStrategy& strategy)
      : n_(n), strategy_(strategy), scale_(static_cast<size_t>(n), 1.0) {}

  FastGftPlan run(const Graph& g) {
    std::vector<int> positions(static_cast<size_t>(n_));
    std::iota(positions.begin(), positions.end(), 0);
    if (n_ > 0) visit(g, positions, 0, true);
    return emit();
  }

 private:
  struct Leaf {
    int node;
    Matrix transform;  // U^T with the pending scale divided out; empty when approximate
    Vector inv_scale;                // approximate leaves: pending scale to divide out
    std::vector<GivensLayer> layers;  // approximate leaves: local indices
    Vector eigenvalues;               // per leaf coordinate
    int size() const { return static_cast<int>(eigenvalues.size()); }
  };

  int new_node(PlanNodeKind kind, int depth, const std::vector<int>& positions) {
    nodes_.push_back(PlanNode{kind, depth, positions, {}, {}, {}});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<Involution> candidates(const Graph& g, bool root) const {
    if (root && !strategy_.hints.empty()) {
      std::vector<Involution> valid;
      for (const auto& phi : strategy_.hints) {
        if (phi.size() == g.size() && !phi.is_identity() && is_phi_symmetric(g, phi, strategy_.tol)) {
          valid.push_back(phi);
        }
      }
      if (!valid.empty()) {
        sort_involutions(valid);
        return valid;
      }
    }
    if (is_tree(g)) return search_involutions_tree(g, strategy_.tol);
    return search_involutions(g, strategy_.search_budget, strategy_.tol).involutions;
  }

  // Multiplications of the cheapest single Haar level on each component of g,
  // or of a dense transform where no symmetry exists.
  std::int64_t one_level_cost(const Graph& g) const {
    std::int64_t total = 0;
    for (const auto& comp : split_components(g)) {
      const std::int64_t m = comp.graph.size();
      std::int64_t best = m * m;
      if (m > strategy_.min_leaf_size) {
        const auto found = candidates(comp.graph, false);
        if (!found.empty()) {
          const std::int64_t p = found.front().pair_count();
          best = p * p + (m - p) * (m - p);
        }
      }
      total += best;
    }
    return total;
  }

  // Involution whose G+ and G- admit the cheapest next level; ties go to the
  // earlier candidate (more pairs, then lexicographic).
  const Involution& choose(const Graph& g, const std::vector<Involution>& found) const {
    if (found.size() == 1) return found.front();
    size_t best = 0;
    std::int64_t best_cost = -1;
    for (size_t k = 0; k < found.size(); ++k) {
      const DecompositionResult dec = decompose(g, found[k], strategy_.tol);
      const std::int64_t cost = one_level_cost(dec.g_plus) + one_level_cost(dec.g_minus);
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best = k;
      }
    }
    return found[best];
  }

  int visit(const Graph& g, const std::vector<int>& positions, int depth, bool root) {
    auto components = split_components(g);
    if (components.size() > 1) {
      const int id = new_node(PlanNodeKind::Split, depth, positions);
      for (const auto& comp : components) {
        std::vector<int> sub;
        for (int v : comp.nodes) sub.push_back(positions[static_cast<size_t>(v)]);
        const int child = visit(comp.graph, sub, depth, false);
        nodes_[static_cast<size_t>(id)].children.push_back(child);
      }
      return id;
    }

    if (g.size() > strategy_.min_leaf_size && depth < strategy_.max_depth) {
      const auto found = candidates(g, root);
      if (!found.empty()) return split_haar(g, positions, depth, choose(g, found));
    }
    return make_leaf(g, positions, depth);
  }

  int split_haar(const Graph& g, const std::vector<int>& positions, int depth, const Involution& phi) {
    const DecompositionResult dec = decompose(g, phi, strategy_.tol);
    const int id = new_node(PlanNodeKind::Haar, depth, positions);
    nodes_[static_cast<size_t>(id)].phi = phi.map();

    if (levels_.size() <= static_cast<size_t>(depth)) {
      levels_.resize(static_cast<size_t>(depth) + 1);
      prescale_.resize(static_cast<size_t>(depth) + 1);
    }
    for (const auto& [i, j] : dec.stage.pairs) {
      const int pi = positions[static_cast<size_t>(i)];
      const int pj = positions[static_cast<size_t>(j)];
      double& si = scale_[static_cast<size_t>(pi)];
      double& sj = scale_[static_cast<size_t>(pj)];
      // Both inputs of a butterfly must carry the same pending scale.
      if (!scales_equal(si, sj)) {
        if (si < sj) {
          prescale_[static_cast<size_t>(depth)][pi] = sj / si;
          si = sj;
        } else {
          prescale_[static_cast<size_t>(depth)][pj] = si / sj;
          sj = si;
        }
      }
      levels_[static_cast<size_t>(depth)].emplace_back(pi, pj);
      si *= std::numbers::sqrt2;
      sj *= std::numbers::sqrt2;
    }

    std::vector<int> plus_pos;
    std::vector<int> minus_pos;
    for (int v : dec.plus_nodes) plus_pos.push_back(positions[static_cast<size_t>(v)]);
    for (int v : dec.minus_nodes) minus_pos.push_back(positions[static_cast<size_t>(v)]);
    const int plus = visit(dec.g_plus, plus_pos, depth + 1, false);
    nodes_[static_cast<size_t>(id)].children.push_back(plus);
    if (!minus_pos.empty()) {
      const int minus = visit(dec.g_minus, minus_pos, depth + 1, false);
      nodes_[static_cast<size_t>(id)].children.push_back(minus);
    }
    return id;
  }

  int make_leaf(const Graph& g, const std::vector<int>& positions, int depth) {
    const int id = new_node(PlanNodeKind::Leaf, depth, positions);
    Vector inv_scale(g.size());
    for (int k = 0; k < g.size(); ++k) inv_scale(k) = 1.0 / scale_[static_cast<size_t>(positions[static_cast<size_t>(k)])];
    if (strategy_.leaf_givens_layers >= 0) {
      ApproxGftPlan approx = truncated_jacobi(laplacian(g), strategy_.leaf_givens_layers);
      Vector diagonal(g.size());
      for (int k = 0; k < g.size(); ++k) diagonal(approx.perm[static_cast<size_t>(k)]) = approx.eigenvalues(k);
      leaves_.push_back(Leaf{id, Matrix(), inv_scale, std::move(approx.layers), diagonal});
      return id;
    }
    const Spectrum s = gft(g);
    leaves_.push_back(Leaf{id, s.eigenvectors.transpose() * inv_scale.asDiagonal(), Vector(), {}, s.eigenvalues});
    return id;
  }

  FastGftPlan emit() {
    FastGftPlan plan;
    plan.n = n_;

    // Relabel positions so that every leaf occupies a contiguous range; the
    // relabelling becomes the plan's first stage.
    std::vector<int> gather;
    std::vector<double> evals;
    for (const auto& leaf : leaves_) {
      const auto& pos = nodes_[static_cast<size_t>(leaf.node)].positions;
      gather.insert(gather.end(), pos.begin(), pos.end());
      evals.insert(evals.end(), leaf.eigenvalues.begin(), leaf.eigenvalues.end());
    }
    std::vector<int> slot(static_cast<size_t>(n_));
    for (int k = 0; k < n_; ++k) slot[static_cast<size_t>(gather[static_cast<size_t>(k)])] = k;
    auto is_identity = [](const std::vector<int>& p) {
      for (size_t k = 0; k < p.size(); ++k) {
        if (p[k] != static_cast<int>(k)) return false;
      }
      return true;
    };
    if (!is_identity(gather)) plan.stages.push_back(Permutation{gather});

    for (size_t d = 0; d < levels_.size(); ++d) {
      if (!prescale_[d].empty()) {
        Vector f = Vector::Ones(n_);
        for (const auto& [pos, factor] : prescale_[d]) f(slot[static_cast<size_t>(pos)]) = factor;
        plan.stages.push_back(Scale{f});
      }
      if (!levels_[d].empty()) {
        HaarButterfly h;
        for (const auto& [i, j] : levels_[d]) h.pairs.emplace_back(slot[static_cast<size_t>(i)], slot[static_cast<size_t>(j)]);
        plan.stages.push_back(std::move(h));
      }
    }

    Vector singles = Vector::Ones(n_);
    bool any_single = false;
    int offset = 0;
    std::vector<DenseBlock> blocks;
    std::vector<GivensLayer> rotations;
    for (const auto& leaf : leaves_) {
      const int k = leaf.size();
      if (leaf.transform.size() == 0) {
        for (int i = 0; i < k; ++i) {
          singles(offset + i) = leaf.inv_scale(i);
          any_single = any_single || singles(offset + i) != 1.0;
        }
        // Layers of all approximate leaves run side by side.
        if (rotations.size() < leaf.layers.size()) rotations.resize(leaf.layers.size());
        for (size_t t = 0; t < leaf.layers.size(); ++t) {
          for (auto r : leaf.layers[t].rotations) {
            r.p += offset;
            r.q += offset;
            rotations[t].rotations.push_back(r);
          }
        }
      } else if (k == 1) {
        singles(offset) = leaf.transform(0, 0);
        any_single = any_single || singles(offset) != 1.0;
      } else {
        blocks.push_back(DenseBlock{offset, leaf.transform});
      }
      offset += k;
    }
    if (any_single) plan.stages.push_back(Scale{singles});
    for (auto& b : blocks) plan.stages.push_back(std::move(b));
    for (auto& layer : rotations) plan.stages.push_back(std::move(layer));

    // Ascending eigenvalue; clusters of numerically equal values keep leaf order.
    std::vector<int> order(static_cast<size_t>(n_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return evals[static_cast<size_t>(a)] < evals[static_cast<size_t>(b)]; });
    for (size_t a = 0; a < order.size();) {
      size_t b = a + 1;
      while (b < order.size() &&
             evals[static_cast<size_t>(order[b])] - evals[static_cast<size_t>(order[b - 1])] <= 1e-8) {
        ++b;
      }
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(a), order.begin() + static_cast<std::ptrdiff_t>(b));
      a = b;
    }
    if (!is_identity(order)) plan.stages.push_back(Permutation{order});

    plan.eigenvalues.resize(n_);
    std::vector<int> output_of(static_cast<size_t>(n_));
    for (int k = 0; k < n_; ++k) {
      plan.eigenvalues(k) = evals[static_cast<size_t>(order[static_cast<size_t>(k)])];
      output_of[static_cast<size_t>(order[static_cast<size_t>(k)])] = k;
    }
    offset = 0;
    for (const auto& leaf : leaves_) {
      auto& coeffs = nodes_[static_cast<size_t>(leaf.node)].coefficients;
      for (int k = 0; k < leaf.size(); ++k) coeffs.push_back(output_of[static_cast<size_t>(offset + k)]);
      std::sort(coeffs.begin(), coeffs.end());
      offset += leaf.size();
    }
    if (!nodes_.empty()) collect_coefficients(0);
    plan.provenance = std::move(nodes_);
    return plan;
  }

  const std::vector<int>& collect_coefficients(int id) {
    auto& node = nodes_[static_cast<size_t>(id)];
    if (node.kind != PlanNodeKind::Leaf) {
      std::vector<int> all;
      for (int c : node.children) {
        const auto& sub = collect_coefficients(c);
        all.insert(all.end(), sub.begin(), sub.end());
      }
      std::sort(all.begin(), all.end());
      nodes_[static_cast<size_t>(id)].coefficients = std::move(all);
    }
    return nodes_[static_cast<size_t>(id)].coefficients;
  }

  int n_;
  const PlanStrategy& strategy_;
  std::vector<double> scale_;
  std::vector<std::vector<std::pair<int, int>>> levels_;
  std::vector<std::map<int, double>> prescale_;
  std::vector<Leaf> leaves_;
  std::vector<PlanNode> nodes_;
};

void check_dimension(const FastGftPlan& plan, Eigen::Index rows, const char* what) {
  if (rows != plan.n) {
    throw std::invalid_argument(std::string(what) + ": signal length " + std::to_string(rows) +
                                " does not match plan size " + std::to_string(plan.n));
  }
}

// Signals are processed in chunks of kLanes, stored interleaved so that
// element i of lane s sits at i * kLanes + s. Every lane goes through the
// same arithmetic in the same order, so results do not depend on chunking.
constexpr int kLanes = 16;

struct CompiledStage {
  enum class Kind { Haar, Perm, Dense, Scale, Givens } kind;
  std::vector<int> index;      // Haar/Givens: flattened pairs; Perm: source rows
  std::vector<double> values;  // Dense: row-major block; Scale: factors; Givens: (c, s) pairs
  int offset = 0;
  int size = 0;
};

std::vector<CompiledStage> compile(const FastGftPlan& plan) {
  std::vector<CompiledStage> out;
  for (const auto& stage : plan.stages) {
    CompiledStage c{};
    if (const auto* h = std::get_if<HaarButterfly>(&stage)) {
      c.kind = CompiledStage::Kind::Haar;
      for (const auto& [i, j] : h->pairs) {
        c.index.push_back(i);
        c.index.push_back(j);
      }
    } else if (const auto* p = std::get_if<Permutation>(&stage)) {
      c.kind = CompiledStage::Kind::Perm;
      c.index = p->perm;
    } else if (const auto* d = std::get_if<DenseBlock>(&stage)) {
      c.kind = CompiledStage::Kind::Dense;
      c.offset = d->offset;
      c.size = static_cast<int>(d->matrix.rows());
      // Rows in groups of 4, then 2, then 1, each group stored column by column.
      const int k = c.size;
      for (int r = 0; r < k;) {
        const int rows = k - r >= 4 ? 4 : (k - r >= 2 ? 2 : 1);
        for (int col = 0; col < k; ++col) {
          for (int t = 0; t < rows; ++t) c.values.push_back(d->matrix(r + t, col));
        }
        r += rows;
      }
    } else if (const auto* sc = std::get_if<Scale>(&stage)) {
      c.kind = CompiledStage::Kind::Scale;
      for (Eigen::Index i = 0; i < sc->factors.size(); ++i) {
        if (sc->factors(i) != 1.0) {
          c.index.push_back(static_cast<int>(i));
          c.values.push_back(sc->factors(i));
        }
      }
    } else if (const auto* g = std::get_if<GivensLayer>(&stage)) {
      c.kind = CompiledStage::Kind::Givens;
      for (const auto& r : g->rotations) {
        c.index.push_back(r.p);
        c.index.push_back(r.q);
        c.values.push_back(std::cos(r.theta));
        c.values.push_back(std::sin(r.theta));
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

// Rows [r, r + R) of a dense block; `block` holds them column by column.
// Each output is accumulated over the input index in ascending order from
// zero, so the result does not depend on R or on the lane.
template <int R>
void dense_rows(const double* block, int k, const double* in, double* out) {
  for (int g = 0; g < kLanes; g += 4) {
    double acc[R][4] = {};
    for (int c = 0; c < k; ++c) {
      const double* src = in + c * kLanes + g;
      const double* m = block + c * R;
      for (int t = 0; t < R; ++t) {
        for (int s = 0; s < 4; ++s) acc[t][s] += m[t] * src[s];
      }
    }
    for (int t = 0; t < R; ++t) {
      for (int s = 0; s < 4; ++s) out[t * kLanes + g + s] = acc[t][s];
    }
  }
}

void dense_block(const CompiledStage& st, double* x, double* scratch) {
  const int k = st.size;
  const double* in = x + st.offset * kLanes;
  const double* packed = st.values.data();
  int r = 0;
  for (; r + 4 <= k; r += 4) dense_rows<4>(packed + r * k, k, in, scratch + r * kLanes);
  if (r + 2 <= k) {
    dense_rows<2>(packed + r * k, k, in, scratch + r * kLanes);
    r += 2;
  }
  if (r < k) dense_rows<1>(packed + r * k, k, in, scratch + r * kLanes);
  std::copy_n(scratch, k * kLanes, x + st.offset * kLanes);
}

void run_chunk(std::span<const CompiledStage> program, int n, double* x, double* scratch) {
  for (const auto& st : program) {
    switch (st.kind) {
      case CompiledStage::Kind::Haar:
        for (size_t k = 0; k < st.index.size(); k += 2) {
          double* a = x + st.index[k] * kLanes;
          double* b = x + st.index[k + 1] * kLanes;
          for (int s = 0; s < kLanes; ++s) {
            const double u = a[s];
            const double v = b[s];
            a[s] = u + v;
            b[s] = u - v;
          }
        }
        break;
      case CompiledStage::Kind::Perm:
        for (int k = 0; k < n; ++k) {
          std::copy_n(x + st.index[static_cast<size_t>(k)] * kLanes, kLanes, scratch + k * kLanes);
        }
        std::copy_n(scratch, n * kLanes, x);
        break;
      case CompiledStage::Kind::Dense:
        dense_block(st, x, scratch);
        break;
      case CompiledStage::Kind::Scale:
        for (size_t k = 0; k < st.index.size(); ++k) {
          double* a = x + st.index[k] * kLanes;
          const double f = st.values[k];
          for (int s = 0; s < kLanes; ++s) a[s] *= f;
        }
        break;
      case CompiledStage::Kind::Givens:
        for (size_t k = 0; k < st.index.size(); k += 2) {
          double* a = x + st.index[k] * kLanes;
          double* b = x + st.index[k + 1] * kLanes;
          const double c = st.values[k];
          const double sn = st.values[k + 1];
          for (int s = 0; s < kLanes; ++s) {
            const double u = a[s];
            const double v = b[s];
            a[s] = c * u + sn * v;
            b[s] = -sn * u + c * v;
          }
        }
        break;
    }
  }
}

// Columns [begin, end) of X into the same columns of Y. A leading or
// trailing permutation is applied while loading or storing the chunk.
void run_columns(const std::vector<CompiledStage>& program, int n, const Matrix& X, Matrix& Y,
                 Eigen::Index begin, Eigen::Index end) {
  std::span<const CompiledStage> body(program);
  const std::vector<int>* load = nullptr;
  const std::vector<int>* store = nullptr;
  if (!body.empty() && body.front().kind == CompiledStage::Kind::Perm) {
    load = &body.front().index;
    body = body.subspan(1);
  }
  if (!body.empty() && body.back().kind == CompiledStage::Kind::Perm) {
    store = &body.back().index;
    body = body.first(body.size() - 1);
  }
  std::vector<double> x(static_cast<size_t>(n) * kLanes);
  std::vector<double> scratch(static_cast<size_t>(n) * kLanes);
  for (Eigen::Index c0 = begin; c0 < end; c0 += kLanes) {
    const int lanes = static_cast<int>(std::min<Eigen::Index>(kLanes, end - c0));
    if (lanes < kLanes) std::fill(x.begin(), x.end(), 0.0);
    for (int s = 0; s < lanes; ++s) {
      const double* col = X.col(c0 + s).data();
      for (int i = 0; i < n; ++i) {
        x[static_cast<size_t>(i * kLanes + s)] = col[load ? (*load)[static_cast<size_t>(i)] : i];
      }
    }
    run_chunk(body, n, x.data(), scratch.data());
    for (int s = 0; s < lanes; ++s) {
      double* col = Y.col(c0 + s).data();
      for (int i = 0; i < n; ++i) {
        col[i] = x[static_cast<size_t>((store ? (*store)[static_cast<size_t>(i)] : i) * kLanes + s)];
      }
    }
  }
}

}  // namespace

FastGftPlan plan_fast_gft(const Graph& g, const PlanStrategy& strategy) {
  return Planner(g.size(), strategy).run(g);
}

FastGftPlan dense_plan(const Graph& g) {
  const Spectrum s = gft(g);
  FastGftPlan plan;
  plan.n = g.size();
  plan.eigenvalues = s.eigenvalues;
  if (plan.n == 0) return plan;
  plan.stages.push_back(DenseBlock{0, s.eigenvectors.transpose()});
  std::vector<int> all(static_cast<size_t>(plan.n));
  std::iota(all.begin(), all.end(), 0);
  plan.provenance.push_back(PlanNode{PlanNodeKind::Leaf, 0, all, {}, {}, all});
  return plan;
}

Vector apply(const FastGftPlan& plan, const Vector& x) {
  check_dimension(plan, x.size(), "apply");
  const Matrix out = apply_batch(plan, x);
  return out.col(0);
}

Matrix apply_batch(const FastGftPlan& plan, const Matrix& X, int threads) {
  check_dimension(plan, X.rows(), "apply_batch");
  Matrix out(X.rows(), X.cols());
  const auto program = compile(plan);
  const Eigen::Index chunks = (X.cols() + kLanes - 1) / kLanes;
  const int t = static_cast<int>(std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(chunks, 1)));
  if (t == 1) {
    run_columns(program, plan.n, X, out, 0, X.cols());
    return out;
  }
  // Split on chunk boundaries.
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w) {
    const Eigen::Index begin = std::min(X.cols(), chunks * w / t * kLanes);
    const Eigen::Index end = std::min(X.cols(), chunks * (w + 1) / t * kLanes);
    pool.emplace_back([&, begin, end] { run_columns(program, plan.n, X, out, begin, end); });
  }
  for (auto& th : pool) th.join();
  return out;
}

OpCount op_count(const PlanStage& stage) {
  OpCount c;
  if (const auto* h = std::get_if<HaarButterfly>(&stage)) {
    c.additions = 2 * static_cast<std::int64_t>(h->pairs.size());
  } else if (const auto* d = std::get_if<DenseBlock>(&stage)) {
    const std::int64_t k = d->matrix.rows();
    c.multiplications = k * k;
    c.additions = k * (k - 1);
  } else if (const auto* s = std::get_if<Scale>(&stage)) {
    for (double f : s->factors) c.multiplications += std::abs(f) != 1.0 ? 1 : 0;
  } else if (const auto* g = std::get_if<GivensLayer>(&stage)) {
    c.multiplications = 4 * static_cast<std::int64_t>(g->rotations.size());
    c.additions = 2 * static_cast<std::int64_t>(g->rotations.size());
  }
  return c;
}

OpCount op_count(const FastGftPlan& plan) {
  OpCount total;
  for (const auto& stage : plan.stages) {
    const OpCount c = op_count(stage);
    total.additions += c.additions;
    total.multiplications += c.multiplications;
  }
  return total;
}

Matrix realized_matrix(const FastGftPlan& plan) {
  return apply_batch(plan, Matrix::Identity(plan.n, plan.n));
}

double orthogonality_error(const FastGftPlan& plan) {
  if (plan.n == 0) return 0.0;
  const Matrix P = realized_matrix(plan);
  return (P * P.transpose() - Matrix::Identity(plan.n, plan.n)).cwiseAbs().maxCoeff();
}

double diagonalization_error(const FastGftPlan& plan, const Graph& g) {
  if (g.size() != plan.n) throw std::invalid_argument("diagonalization_error: size mismatch");
  if (plan.n == 0) return 0.0;
  const Matrix L = laplacian(g);
  const Matrix U = realized_matrix(plan).transpose();
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  return (L * U - U * plan.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff() / scale;
}

Matrix subtransform(const FastGftPlan& plan, int node) {
  if (node < 0 || node >= static_cast<int>(plan.provenance.size())) {
    throw std::out_of_range("subtransform: no such provenance node");
  }
  const PlanNode& target = plan.provenance[static_cast<size_t>(node)];

  // Normalized Haar cascade of every level above the target.
  Matrix H = Matrix::Identity(plan.n, plan.n);
  for (int d = 0; d < target.depth; ++d) {
    HaarStage level;
    level.n = plan.n;
    std::vector<bool> paired(static_cast<size_t>(plan.n), false);
    for (const auto& pn : plan.provenance) {
      if (pn.kind != PlanNodeKind::Haar || pn.depth != d) continue;
      for (size_t i = 0; i < pn.phi.size(); ++i) {
        const size_t j = static_cast<size_t>(pn.phi[i]);
        if (i < j) {
          level.pairs.emplace_back(pn.positions[i], pn.positions[j]);
          paired[static_cast<size_t>(pn.positions[i])] = true;
          paired[static_cast<size_t>(pn.positions[j])] = true;
        }
      }
    }
    for (int k = 0; k < plan.n; ++k) {
      if (!paired[static_cast<size_t>(k)]) level.passthrough.push_back(k);
    }
    H = haar_stage_matrix(level).transpose() * H;
  }

  const Matrix P = realized_matrix(plan);
  const auto& rows = target.coefficients;
  const auto& cols = target.positions;
  Matrix T(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      T(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = P.row(rows[r]).dot(H.row(cols[c]));
    }
  }
  return T;
}

int haar_stage_count(const FastGftPlan& plan) {
  return static_cast<int>(std::count_if(plan.stages.begin(), plan.stages.end(), [](const PlanStage& s) {
    return std::holds_alternative<HaarButterfly>(s);
  }));
}

namespace {

nlohmann::json node_to_json(const PlanNode& node) {
  static const char* kinds[] = {"leaf", "haar", "split"};
  nlohmann::json j;
  j["kind"] = kinds[static_cast<int>(node.kind)];
  j["depth"] = node.depth;
  j["positions"] = node.positions;
  if (!node.phi.empty()) j["phi"] = node.phi;
  j["children"] = node.children;
  j["coefficients"] = node.coefficients;
  return j;
}

PlanNode node_from_json(const nlohmann::json& j) {
  PlanNode node;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    node.kind = PlanNodeKind::Leaf;
  } else if (kind == "haar") {
    node.kind = PlanNodeKind::Haar;
  } else if (kind == "split") {
    node.kind = PlanNodeKind::Split;
  } else {
    throw std::invalid_argument("unknown provenance kind '" + kind + "'");
  }
  node.depth = j.at("depth").get<int>();
  node.positions = j.at("positions").get<std::vector<int>>();
  if (j.contains("phi")) node.phi = j.at("phi").get<std::vector<int>>();
  node.children = j.at("children").get<std::vector<int>>();
  node.coefficients = j.at("coefficients").get<std::vector<int>>();
  return node;
}

void check_index(int i, int n) {
  if (i < 0 || i >= n) throw std::invalid_argument("plan JSON: index " + std::to_string(i) + " out of range");
}

PlanStage stage_from_json(const nlohmann::json& j, int n) {
  const auto type = j.at("type").get<std::string>();
  if (type == "haar") {
    HaarButterfly h;
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (const auto& p : j.at("pairs")) {
      const int a = p.at(0).get<int>();
      const int b = p.at(1).get<int>();
      check_index(a, n);
      check_index(b, n);
      if (a == b || used[static_cast<size_t>(a)] || used[static_cast<size_t>(b)]) {
        throw std::invalid_argument("plan JSON: haar pairs overlap");
      }
      used[static_cast<size_t>(a)] = used[static_cast<size_t>(b)] = true;
      h.pairs.emplace_back(a, b);
    }
    return h;
  }
  if (type == "perm") {
    Permutation p{j.at("perm").get<std::vector<int>>()};
    std::vector<int> sorted = p.perm;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < n; ++k) {
      if (static_cast<int>(sorted.size()) != n || sorted[static_cast<size_t>(k)] != k) {
        throw std::invalid_argument("plan JSON: perm is not a permutation");
      }
    }
    return p;
  }
  if (type == "dense") {
    DenseBlock d;
    d.offset = j.at("offset").get<int>();
    const auto& rows = j.at("matrix");
    const auto k = static_cast<Eigen::Index>(rows.size());
    if (d.offset < 0 || d.offset + k > n) throw std::invalid_argument("plan JSON: dense block out of range");
    d.matrix.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<size_t>(r)].size()) != k) {
        throw std::invalid_argument("plan JSON: dense block not square");
      }
      for (Eigen::Index c = 0; c < k; ++c) d.matrix(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    }
    return d;
  }
  if (type == "scale") {
    const auto f = j.at("factors").get<std::vector<double>>();
    if (static_cast<int>(f.size()) != n) throw std::invalid_argument("plan JSON: scale length mismatch");
    return Scale{Eigen::Map<const Vector>(f.data(), n)};
  }
  if (type == "givens") {
    GivensLayer layer;
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (const auto& r : j.at("rotations")) {
      GivensRotation rot{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<double>()};
      check_index(rot.p, n);
      check_index(rot.q, n);
      if (rot.p == rot.q || used[static_cast<size_t>(rot.p)] || used[static_cast<size_t>(rot.q)]) {
        throw std::invalid_argument("plan JSON: givens rotations overlap");
      }
      used[static_cast<size_t>(rot.p)] = used[static_cast<size_t>(rot.q)] = true;
      layer.rotations.push_back(rot);
    }
    return layer;
  }
  throw std::invalid_argument("plan JSON: unknown stage type '" + type + "'");
}

}  // namespace

std::string plan_to_json(const FastGftPlan& plan, bool with_provenance) {
  nlohmann::json j;
  j["n"] = plan.n;
  j["stages"] = nlohmann::json::array();
  for (const auto& stage : plan.stages) {
    nlohmann::json s;
    if (const auto* h = std::get_if<HaarButterfly>(&stage)) {
      s["type"] = "haar";
      s["pairs"] = nlohmann::json::array();
      for (const auto& [a, b] : h->pairs) s["pairs"].push_back({a, b});
    } else if (const auto* p = std::get_if<Permutation>(&stage)) {
      s["type"] = "perm";
      s["perm"] = p->perm;
    } else if (const auto* d = std::get_if<DenseBlock>(&stage)) {
      s["type"] = "dense";
      s["offset"] = d->offset;
      s["matrix"] = nlohmann::json::array();
      for (Eigen::Index r = 0; r < d->matrix.rows(); ++r) {
        std::vector<double> row(d->matrix.row(r).begin(), d->matrix.row(r).end());
        s["matrix"].push_back(row);
      }
    } else if (const auto* sc = std::get_if<Scale>(&stage)) {
      s["type"] = "scale";
      s["factors"] = std::vector<double>(sc->factors.begin(), sc->factors.end());
    } else if (const auto* g = std::get_if<GivensLayer>(&stage)) {
      s["type"] = "givens";
      s["rotations"] = nlohmann::json::array();
      for (const auto& r : g->rotations) s["rotations"].push_back({r.p, r.q, r.theta});
    }
    j["stages"].push_back(std::move(s));
  }
  j["eigenvalues"] = std::vector<double>(plan.eigenvalues.begin(), plan.eigenvalues.end());
  if (with_provenance && !plan.provenance.empty()) {
    j["provenance"] = nlohmann::json::array();
    for (const auto& node : plan.provenance) j["provenance"].push_back(node_to_json(node));
  }
  return j.dump();
}

FastGftPlan plan_from_json(std::string_view text) {
  FastGftPlan plan;
  try {
    const auto j = nlohmann::json::parse(text);
    plan.n = j.at("n").get<int>();
    if (plan.n < 0) throw std::invalid_argument("negative n");
    for (const auto& s : j.at("stages")) plan.stages.push_back(stage_from_json(s, plan.n));
    const auto evals = j.at("eigenvalues").get<std::vector<double>>();
    if (static_cast<int>(evals.size()) != plan.n) throw std::invalid_argument("eigenvalue count mismatch");
    plan.eigenvalues = Eigen::Map<const Vector>(evals.data(), plan.n);
    if (j.contains("provenance")) {
      for (const auto& node : j.at("provenance")) plan.provenance.push_back(node_from_json(node));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("plan JSON: ") + e.what());
  }
  const double err = orthogonality_error(plan);
  if (!(err <= 1e-9)) {
    throw NumericalError("plan JSON: stages are not orthogonal (error " + std::to_string(err) + ")");
  }
  return plan;
}

FastGftPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plan file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return plan_from_json(buf.str());
}

void save_plan(const FastGftPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write plan file '" + path + "'");
  out << plan_to_json(plan) << '\n';
}

}  // namespace fgft
