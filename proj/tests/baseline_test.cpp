#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fgft/baseline.hpp"
#include "fgft/decompose.hpp"
#include "fgft/gallery.hpp"
#include "fgft/spectral.hpp"
#include "test_support.hpp"

namespace fgft {
namespace {

using testing::Rng;

// Columns are the approximate eigenvectors.
Matrix basis_of(const FastGftPlan& plan) { return realized_matrix(plan).transpose(); }

Matrix random_orthogonal(Rng& rng, int n) {
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = testing::uniform(rng, -1, 1);
  }
  return Eigen::HouseholderQR<Matrix>(A).householderQ();
}

double off_diagonal_norm(const Matrix& A) {
  Matrix off = A;
  off.diagonal().setZero();
  return off.norm();
}

TEST(TruncatedJacobiTest, ZeroLayersIsASortingPermutation) {
  const Graph g = uniform_line_graph(5);
  const ApproxGftPlan approx = truncated_jacobi(laplacian(g), 0);
  EXPECT_TRUE(approx.layers.empty());
  const Matrix U = basis_of(approx.to_plan());
  EXPECT_EQ(U.cwiseAbs().sum(), 5.0);
  for (int k = 1; k < 5; ++k) EXPECT_LE(approx.eigenvalues(k - 1), approx.eigenvalues(k));
  EXPECT_THROW(truncated_jacobi(laplacian(g), -1), std::invalid_argument);
}

TEST(TruncatedJacobiTest, OneLayerDiagonalizesTwoNodes) {
  Graph g(2);
  g.set_edge(0, 1, 1.5);
  g.set_self_loop(1, 0.7);
  const ApproxGftPlan approx = truncated_jacobi(laplacian(g), 1);
  ASSERT_EQ(approx.layers.size(), 1u);
  EXPECT_LE(delta_error(basis_of(approx.to_plan()), gft(g).eigenvectors), 1e-10);
}

TEST(TruncatedJacobiTest, UnboundedLayersConverge) {
  Rng rng(41);
  for (int t = 0; t < 30; ++t) {
    const int n = testing::uniform_int(rng, 2, 32);
    const Matrix L = laplacian(testing::random_graph(rng, n, 0.4, true, false));
    const ApproxGftPlan approx = truncated_jacobi(L, 100000);
    const FastGftPlan plan = approx.to_plan();
    const Matrix U = basis_of(plan);
    EXPECT_LE(off_diagonal_norm(U.transpose() * L * U), 1e-10);
    EXPECT_LE(orthogonality_error(plan), 1e-10);
    EXPECT_LE((approx.eigenvalues - (U.transpose() * L * U).diagonal()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TruncatedJacobiTest, LayersAreDisjointWithSmallAngles) {
  Rng rng(42);
  const Matrix L = laplacian(testing::random_graph(rng, 20, 0.5, true, false));
  const ApproxGftPlan approx = truncated_jacobi(L, 12);
  EXPECT_EQ(approx.layers.size(), 12u);
  for (const auto& layer : approx.layers) {
    std::set<int> touched;
    for (const auto& r : layer.rotations) {
      EXPECT_TRUE(touched.insert(r.p).second);
      EXPECT_TRUE(touched.insert(r.q).second);
      EXPECT_LE(std::abs(r.theta), std::numbers::pi / 4 + 1e-15);
    }
  }
}

TEST(TruncatedJacobiTest, OffDiagonalMassShrinksWithLayers) {
  const Graph g = gallery_entry("bidiag16").graph;
  const Matrix L = laplacian(g);
  double previous = off_diagonal_norm(L);
  for (int j = 1; j <= 20; ++j) {
    const Matrix U = basis_of(truncated_jacobi(L, j).to_plan());
    const double now = off_diagonal_norm(U.transpose() * L * U);
    EXPECT_LE(now, previous + 1e-12) << j;
    previous = now;
  }
}

TEST(DeltaErrorTest, Examples) {
  Rng rng(3);
  const Matrix U = random_orthogonal(rng, 6);
  EXPECT_LE(delta_error(U, U), 1e-12);
  EXPECT_LE(delta_error(-U, U), 1e-12);
  // Swapped basis vectors: |U_hat^T U| - I has four unit entries.
  const Matrix swapped = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  EXPECT_NEAR(delta_error(swapped, Matrix::Identity(2, 2)), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(delta_error(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST(EpsilonErrorTest, Examples) {
  const double c = std::sqrt(0.5);
  const Matrix rotated = (Matrix(2, 2) << c, -c, c, c).finished();
  const Matrix x = (Matrix(2, 1) << 1, 0).finished();
  // | |(1, 0)| - |(c, -c)| |^2 summed: (1 - c)^2 + c^2.
  EXPECT_NEAR(epsilon_error(rotated, Matrix::Identity(2, 2), x), 2.0 - std::sqrt(2.0), 1e-15);
  EXPECT_EQ(epsilon_error(rotated, rotated, x), 0.0);
  EXPECT_THROW(epsilon_error(rotated, rotated, Matrix(2, 0)), std::invalid_argument);
}

TEST(ErrorMetricTest, SignFlipsDoNotMatter) {
  Rng rng(4);
  const Matrix U = random_orthogonal(rng, 8);
  const Matrix U_hat = random_orthogonal(rng, 8);
  Matrix X(8, 50);
  for (int i = 0; i < X.size(); ++i) X(i) = testing::uniform(rng, 0, 1);
  Matrix flipped = U_hat;
  flipped.col(1) *= -1;
  flipped.col(5) *= -1;
  EXPECT_NEAR(delta_error(flipped, U), delta_error(U_hat, U), 1e-12);
  EXPECT_NEAR(epsilon_error(flipped, U, X), epsilon_error(U_hat, U, X), 1e-12);
}

TEST(HaarPlusApproxTest, ZeroLayersKeepsOnlyTheButterflies) {
  const Graph g = cycle_graph(12);
  const Involution phi = gallery_entry("cycle12").known_involutions.front().second;
  const FastGftPlan single = haar_plus_approx(g, phi, 0, 1);
  EXPECT_EQ(haar_stage_count(single), 1);
  for (const auto& stage : single.stages) EXPECT_FALSE(std::holds_alternative<GivensLayer>(stage));
  const Matrix expected = haar_stage_matrix(HaarStage::from_involution(phi));
  EXPECT_LE(testing::distance_up_to_signed_row_permutation(realized_matrix(single), expected), 1e-12);

  const FastGftPlan full = haar_plus_approx(g, phi, 0);
  EXPECT_GT(haar_stage_count(full), 1);
  EXPECT_LE(orthogonality_error(full), 1e-12);
}

TEST(HaarPlusApproxTest, ManyLayersRecoverTheExactTransform) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto [g, phi] = testing::random_symmetric_graph(rng, testing::uniform_int(rng, 4, 20), 0.6);
    const Spectrum s = gft(g);
    const FastGftPlan plan = haar_plus_approx(g, phi, 100000);
    EXPECT_LE(orthogonality_error(plan), 1e-10);
    EXPECT_LE(diagonalization_error(plan, g), 1e-8);
    EXPECT_LE(subspace_distance(basis_of(plan), s.eigenvectors, s.eigenvalues), 1e-8);
  }
}

TEST(HaarPlusApproxTest, RejectsInvalidInput) {
  const std::vector<double> w{1, 2};
  EXPECT_THROW(haar_plus_approx(line_graph(w), Involution({2, 1, 0}), 3), std::invalid_argument);
  EXPECT_THROW(haar_plus_approx(cycle_graph(4), Involution::identity(4), 3), std::invalid_argument);
  EXPECT_THROW(haar_plus_approx(cycle_graph(4), Involution({3, 2, 1, 0}), -1), std::invalid_argument);
  EXPECT_THROW(haar_plus_approx(cycle_graph(4), Involution({3, 2, 1, 0}), 1, 0), std::invalid_argument);
}

TEST(HaarPlusApproxTest, BidiagonalGridAccuracy) {
  const GalleryEntry e = gallery_entry("bidiag64");
  const Spectrum s = gft(e.graph);
  const Matrix L = laplacian(e.graph);
  double previous = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 40; j += 5) {
    const double d = delta_error(basis_of(truncated_jacobi(L, j).to_plan()), s.eigenvectors);
    EXPECT_LE(d, previous + 1e-12) << j;
    previous = d;
  }
  const Involution phi = e.known_involutions.front().second;
  const double approx10 = delta_error(basis_of(truncated_jacobi(L, 10).to_plan()), s.eigenvectors);
  const double haar10 = delta_error(basis_of(haar_plus_approx(e.graph, phi, 10)), s.eigenvectors);
  EXPECT_LT(haar10, approx10);
}

}  // namespace
}  // namespace fgft
