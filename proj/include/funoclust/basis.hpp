#pragma once

#include <vector>

#include "funoclust/types.hpp"

namespace funoclust {

/// Clamped cubic B-spline knot layout: K strictly increasing interior knots
/// inside (lo, hi), boundary knots at multiplicity 4. The induced basis has
/// exactly K+4 functions.
struct KnotVector {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> interior;

  int n_interior() const { return static_cast<int>(interior.size()); }
  int n_basis() const { return n_interior() + 4; }

  /// Full clamped sequence of length K+8: lo x4, interior, hi x4.
  std::vector<double> full_sequence() const;
};

/// Equally spaced interior knots: lo + m*(hi-lo)/(K+1) for m = 1..K.
KnotVector make_knots(double domain_lo, double domain_hi, int n_interior);

/// Cubic B-spline basis evaluated on a grid: entry (r, k) = B_k(t_r).
/// Rows sum to 1 and hold at most 4 nonzero entries.
struct BasisMatrix {
  TimeGrid grid;
  Matrix values;  // j x (K+4)

  int n_points() const { return static_cast<int>(values.rows()); }
  int n_basis() const { return static_cast<int>(values.cols()); }
};

/// Cox-de Boor evaluation of the clamped basis at every grid point.
/// Grid points must lie inside [knots.lo, knots.hi].
BasisMatrix eval_basis(const KnotVector& knots, const TimeGrid& grid);

/// Per-curve ordinary least squares: each output row minimizes
/// ||y_i - B b||^2. Solved through a Householder QR of the shared basis
/// matrix; throws numeric_error when B^T B is numerically rank deficient
/// (smallest singular value below 1e-10 of the largest).
CoefficientSet fit_coefficients(const BasisMatrix& basis, const CurveSet& curves);

/// Fitted values B b_i on the basis grid.
CurveSet reconstruct(const BasisMatrix& basis, const CoefficientSet& coefs);

}  // namespace funoclust
