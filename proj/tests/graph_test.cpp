#include <gtest/gtest.h>

#include <filesystem>

#include "fgft/gallery.hpp"
#include "fgft/graph.hpp"
#include "fgft/spectral.hpp"
#include "test_support.hpp"

namespace fgft {
namespace {

using testing::Rng;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) M(r, c++) = v;
    ++r;
  }
  return M;
}

TEST(GraphTest, EdgesAreStoredOnceAndZeroRemoves) {
  Graph g(3);
  g.set_edge(2, 0, 1.5);
  EXPECT_EQ(g.weight(0, 2), 1.5);
  EXPECT_EQ(g.weight(2, 0), 1.5);
  EXPECT_EQ(g.edges().count({0, 2}), 1u);
  g.set_edge(0, 2, 0.0);
  EXPECT_EQ(g.edge_count(), 0);
  EXPECT_THROW(g.set_edge(1, 1, 1.0), std::invalid_argument);
  EXPECT_THROW(g.set_edge(0, 3, 1.0), std::out_of_range);
}

TEST(LaplacianTest, TwoNodePath) {
  Graph g(2);
  g.set_edge(0, 1, 1.0);
  EXPECT_EQ(laplacian(g), mat({{1, -1}, {-1, 1}}));
}

TEST(LaplacianTest, SingleNodeWithSelfLoop) {
  Graph g(1);
  g.set_self_loop(0, 2.0);
  EXPECT_EQ(laplacian(g), mat({{2}}));
}

TEST(LaplacianTest, FourCycle) {
  const Matrix L = laplacian(cycle_graph(4));
  EXPECT_EQ(L, mat({{2, -1, 0, -1}, {-1, 2, -1, 0}, {0, -1, 2, -1}, {-1, 0, -1, 2}}));
}

TEST(LaplacianTest, RowSumsEqualSelfLoops) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Graph g = testing::random_graph(rng, 9, 0.4, true, false);
    const Vector sums = laplacian(g).rowwise().sum();
    for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(sums(i), g.self_loop(i), 1e-12);
  }
}

TEST(GraphFromLaplacianTest, Examples) {
  const Graph path = graph_from_laplacian(mat({{1, -1}, {-1, 1}}));
  EXPECT_EQ(path.weight(0, 1), 1.0);
  EXPECT_FALSE(path.has_self_loops());

  const Graph loops = graph_from_laplacian(mat({{3, -1}, {-1, 3}}));
  EXPECT_EQ(loops.weight(0, 1), 1.0);
  EXPECT_EQ(loops.self_loop(0), 2.0);
  EXPECT_EQ(loops.self_loop(1), 2.0);

  const Graph single = graph_from_laplacian(mat({{2}}));
  EXPECT_EQ(single.size(), 1);
  EXPECT_EQ(single.self_loop(0), 2.0);

  EXPECT_THROW(graph_from_laplacian(mat({{1, -1}, {0, 1}})), std::invalid_argument);
}

TEST(GraphFromLaplacianTest, RoundTripIsExact) {
  // Integer-valued weights keep every sum exact, so equality is exact too.
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Graph g = testing::random_graph(rng, testing::uniform_int(rng, 1, 12), 0.5, true, true);
    EXPECT_EQ(graph_from_laplacian(laplacian(g)), g);
  }
}

TEST(NormalizedLaplacianTest, Examples) {
  Graph p2(2);
  p2.set_edge(0, 1, 1.0);
  EXPECT_EQ(normalized_laplacian(p2), mat({{1, -1}, {-1, 1}}));

  const Matrix N = normalized_laplacian(cycle_graph(4));
  EXPECT_TRUE(N.isApprox(laplacian(cycle_graph(4)) / 2.0, 1e-15));
  EXPECT_NEAR(N(0, 1), -0.5, 1e-15);
  EXPECT_EQ(N(0, 2), 0.0);

  Graph isolated(3);
  isolated.set_edge(0, 1, 1.0);
  EXPECT_THROW(normalized_laplacian(isolated), std::invalid_argument);
}

TEST(BipartiteTest, Examples) {
  const auto c4 = is_bipartite(cycle_graph(4));
  ASSERT_TRUE(c4.has_value());
  EXPECT_EQ(c4->s1, (std::vector<int>{0, 2}));
  EXPECT_EQ(c4->s2, (std::vector<int>{1, 3}));

  EXPECT_FALSE(is_bipartite(cycle_graph(3)).has_value());

  const auto p3 = is_bipartite(uniform_line_graph(3));
  ASSERT_TRUE(p3.has_value());
  EXPECT_EQ(p3->s1, (std::vector<int>{0, 2}));
  EXPECT_EQ(p3->s2, (std::vector<int>{1}));
}

TEST(BipartiteTest, EveryEdgeCrossesParts) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto [g, k] = testing::random_krbg(rng, 5, 2);
    const auto parts = is_bipartite(g);
    ASSERT_TRUE(parts.has_value());
    std::vector<int> side(static_cast<size_t>(g.size()), -1);
    for (int v : parts->s1) side[static_cast<size_t>(v)] = 0;
    for (int v : parts->s2) side[static_cast<size_t>(v)] = 1;
    for (const auto& [e, w] : g.edges()) EXPECT_NE(side[static_cast<size_t>(e.first)], side[static_cast<size_t>(e.second)]);
  }
}

TEST(KRegularBipartiteTest, Examples) {
  const auto c4 = is_k_regular_bipartite(cycle_graph(4));
  ASSERT_TRUE(c4.has_value());
  EXPECT_EQ(c4->first.s1, (std::vector<int>{0, 2}));
  EXPECT_EQ(c4->second, 2.0);

  EXPECT_FALSE(is_k_regular_bipartite(star_graph(4)).has_value());

  Graph k33(6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 3; j < 6; ++j) k33.set_edge(i, j, 1.0);
  }
  const auto r = is_k_regular_bipartite(k33);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->second, 3.0);
  EXPECT_EQ(r->first.s1.size(), 3u);
}

TEST(QuadraticFormTest, Examples) {
  Graph p2(2);
  p2.set_edge(0, 1, 1.0);
  const std::vector<double> f{1, -1};
  EXPECT_EQ(quadratic_form(laplacian(p2), f), 4.0);
  EXPECT_EQ(quadratic_form(p2, f), 4.0);

  const std::vector<double> c{3, 3, 3, 3};
  EXPECT_NEAR(quadratic_form(laplacian(cycle_graph(4)), c), 0.0, 1e-12);

  const std::vector<double> alt{1, 0, -1, 0};
  EXPECT_EQ(quadratic_form(cycle_graph(4), alt), 4.0);
  EXPECT_THROW(quadratic_form(p2, alt), std::invalid_argument);
}

TEST(QuadraticFormTest, EdgeSumMatchesDenseProduct) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const int n = testing::uniform_int(rng, 1, 15);
    const Graph g = testing::random_graph(rng, n, 0.4, true, false);
    std::vector<double> f(static_cast<size_t>(n));
    for (auto& v : f) v = testing::uniform(rng, -1, 1);
    const Eigen::Map<const Vector> fv(f.data(), n);
    const double dense = fv.dot(laplacian(g) * fv);
    const double edges = quadratic_form(g, f);
    EXPECT_LE(std::abs(dense - edges), 1e-12 * std::max(1.0, std::abs(dense)));
  }
}

TEST(LaplacianTest, PositiveSemidefiniteWithConstantNullVector) {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const int n = testing::uniform_int(rng, 2, 14);
    const Graph g = testing::random_graph(rng, n, 0.5, false, false);
    const Matrix L = laplacian(g);
    EXPECT_GE(jacobi_eigh(L).eigenvalues.minCoeff(), -1e-10);
    EXPECT_LE((L * Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GraphJsonTest, RoundTripAndEitherEdgeOrientation) {
  Rng rng(2);
  const Graph g = testing::random_graph(rng, 8, 0.5, true, false);
  EXPECT_EQ(graph_from_json(graph_to_json(g)), g);

  const Graph h = graph_from_json(R"({"n": 3, "edges": [[2, 0, 1.5], [1, 2, -1]], "self_loops": [[1, 0.25]]})");
  EXPECT_EQ(h.weight(0, 2), 1.5);
  EXPECT_EQ(h.weight(1, 2), -1.0);
  EXPECT_EQ(h.self_loop(1), 0.25);

  EXPECT_THROW(graph_from_json("{\"n\": 2, \"edges\": [[0, 5, 1]]}"), std::invalid_argument);
  EXPECT_THROW(graph_from_json("not json"), std::invalid_argument);
}

TEST(GraphJsonTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "fgft_graph_test.json";
  const Graph g = skeleton_graph(15);
  save_graph(g, path.string());
  EXPECT_EQ(load_graph(path.string()), g);
  std::filesystem::remove(path);
  EXPECT_THROW(load_graph(path.string()), std::invalid_argument);
}

}  // namespace
}  // namespace fgft
