#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fgft {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative tolerance for comparing edge and self-loop weights.
inline constexpr double kWeightTol = 1e-12;

/// Raised when a numerical routine cannot meet its accuracy contract
/// (non-convergence, orthogonality check failure on load, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |a - b| <= tol * max(1, |a|, |b|).
inline bool weights_equal(double a, double b, double tol = kWeightTol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

}  // namespace fgft
