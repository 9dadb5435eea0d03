#include "fgft/baseline.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "fgft/decompose.hpp"

namespace fgft {

namespace {

struct JacobiRun {
  std::vector<GivensLayer> layers;
  Vector diagonal;
};

// Rotation angle zeroing A(p, q) under A <- Theta^T A Theta.
double annihilating_angle(const Matrix& A, int p, int q) {
  const double d = A(q, q) - A(p, p);
  const double apq = A(p, q);
  if (d == 0.0) return apq > 0.0 ? -std::numbers::pi / 4 : std::numbers::pi / 4;
  return 0.5 * std::atan(-2.0 * apq / d);
}

void rotate(Matrix& A, int p, int q, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Eigen::Index n = A.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = A(k, p);
    const double akq = A(k, q);
    A(k, p) = c * akp + s * akq;
    A(k, q) = -s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = A(p, k);
    const double aqk = A(q, k);
    A(p, k) = c * apk + s * aqk;
    A(q, k) = -s * apk + c * aqk;
  }
  A(p, q) = 0.0;
  A(q, p) = 0.0;
}

JacobiRun run_jacobi(const Matrix& L, int layers) {
  if (L.rows() != L.cols()) throw std::invalid_argument("truncated_jacobi: matrix not square");
  if (layers < 0) throw std::invalid_argument("truncated_jacobi: negative layer count");
  const int n = static_cast<int>(L.rows());
  Matrix A = 0.5 * (L + L.transpose());
  JacobiRun run;
  for (int layer = 0; layer < layers; ++layer) {
    GivensLayer current;
    std::vector<bool> used(static_cast<size_t>(n), false);
    while (true) {
      int best_p = -1;
      int best_q = -1;
      double best = 1e-14;
      for (int p = 0; p < n; ++p) {
        if (used[static_cast<size_t>(p)]) continue;
        for (int q = p + 1; q < n; ++q) {
          if (used[static_cast<size_t>(q)]) continue;
          if (std::abs(A(p, q)) > best) {
            best = std::abs(A(p, q));
            best_p = p;
            best_q = q;
          }
        }
      }
      if (best_p < 0) break;
      const double theta = annihilating_angle(A, best_p, best_q);
      rotate(A, best_p, best_q, theta);
      used[static_cast<size_t>(best_p)] = used[static_cast<size_t>(best_q)] = true;
      current.rotations.push_back({best_p, best_q, theta});
    }
    if (current.rotations.empty()) break;
    run.layers.push_back(std::move(current));
  }
  run.diagonal = A.diagonal();
  return run;
}

std::vector<int> ascending_order(const Vector& values) {
  std::vector<int> order(static_cast<size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
  return order;
}

}  // namespace

FastGftPlan ApproxGftPlan::to_plan() const {
  FastGftPlan plan;
  plan.n = n;
  for (const auto& layer : layers) plan.stages.push_back(layer);
  plan.stages.push_back(Permutation{perm});
  plan.eigenvalues = eigenvalues;
  return plan;
}

ApproxGftPlan truncated_jacobi(const Matrix& L, int layers) {
  JacobiRun run = run_jacobi(L, layers);
  ApproxGftPlan plan;
  plan.n = static_cast<int>(L.rows());
  plan.layers = std::move(run.layers);
  plan.perm = ascending_order(run.diagonal);
  plan.eigenvalues.resize(plan.n);
  for (int k = 0; k < plan.n; ++k) plan.eigenvalues(k) = run.diagonal(plan.perm[static_cast<size_t>(k)]);
  return plan;
}

double delta_error(const Matrix& U_hat, const Matrix& U) {
  if (U_hat.rows() != U.rows() || U_hat.cols() != U.cols() || U.rows() != U.cols()) {
    throw std::invalid_argument("delta_error: dimension mismatch");
  }
  const Eigen::Index n = U.rows();
  if (n == 0) return 0.0;
  const Matrix M = (U_hat.transpose() * U).cwiseAbs() - Matrix::Identity(n, n);
  return M.norm() / std::sqrt(static_cast<double>(n));
}

double epsilon_error(const Matrix& U_hat, const Matrix& U, const Matrix& X) {
  if (U_hat.rows() != U.rows() || U_hat.cols() != U.cols() || X.rows() != U.rows()) {
    throw std::invalid_argument("epsilon_error: dimension mismatch");
  }
  if (X.cols() == 0) throw std::invalid_argument("epsilon_error: empty signal set");
  const Matrix diff = (U.transpose() * X).cwiseAbs() - (U_hat.transpose() * X).cwiseAbs();
  return diff.squaredNorm() / static_cast<double>(X.cols());
}

FastGftPlan haar_plus_approx(const Graph& g, const Involution& phi, int layers, int max_depth) {
  if (phi.size() != g.size() || !is_phi_symmetric(g, phi)) {
    throw std::invalid_argument("haar_plus_approx: graph is not symmetric under phi");
  }
  if (phi.is_identity()) throw std::invalid_argument("haar_plus_approx: phi pairs no nodes");
  if (layers < 0) throw std::invalid_argument("haar_plus_approx: negative layer count");
  if (max_depth < 1) throw std::invalid_argument("haar_plus_approx: max_depth must be at least 1");
  PlanStrategy strategy;
  strategy.max_depth = max_depth;
  strategy.hints = {phi};
  strategy.leaf_givens_layers = layers;
  return plan_fast_gft(g, strategy);
}

}  // namespace fgft
