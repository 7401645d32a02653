#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace funoclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Reserved label for trimmed/outlying curves. Clusters are numbered 1..G.
inline constexpr int kOutlierLabel = 0;

/// Thrown when a numeric routine degenerates beyond recovery (singular
/// covariance, collapsed mixture component after restarts, ...).
/// The CLI maps this to exit code 2.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sampling times t_1 < ... < t_j shared by every curve in a set.
struct TimeGrid {
  std::vector<double> points;

  int size() const { return static_cast<int>(points.size()); }
  double lo() const { return points.front(); }
  double hi() const { return points.back(); }
  bool strictly_increasing() const;
};

/// j equally spaced points covering [lo, hi] inclusive.
TimeGrid uniform_grid(double lo, double hi, int n_points);

/// Discretized curves on a shared grid, one row per curve. The optional
/// missing mask (1 = missing) is populated by the CSV loader before
/// imputation; fitted or simulated sets leave it empty.
struct CurveSet {
  TimeGrid grid;
  Matrix values;  // n x j
  std::optional<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> missing;

  int n_curves() const { return static_cast<int>(values.rows()); }
  int n_points() const { return static_cast<int>(values.cols()); }
};

/// Fitted basis coefficients, one row per curve, K+4 columns.
struct CoefficientSet {
  Matrix coefs;  // n x (K+4)

  int n_curves() const { return static_cast<int>(coefs.rows()); }
  int dim() const { return static_cast<int>(coefs.cols()); }
};

}  // namespace funoclust
