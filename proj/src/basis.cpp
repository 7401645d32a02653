#include "funoclust/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace funoclust {

bool TimeGrid::strictly_increasing() const {
  for (std::size_t r = 1; r < points.size(); ++r)
    if (!(points[r] > points[r - 1])) return false;
  return true;
}

TimeGrid uniform_grid(double lo, double hi, int n_points) {
  if (!(lo < hi)) throw std::invalid_argument("uniform_grid: lo must be < hi");
  if (n_points < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  TimeGrid grid;
  grid.points.resize(n_points);
  for (int r = 0; r < n_points; ++r)
    grid.points[r] = lo + (hi - lo) * r / (n_points - 1);
  grid.points.back() = hi;
  return grid;
}

std::vector<double> KnotVector::full_sequence() const {
  std::vector<double> seq;
  seq.reserve(interior.size() + 8);
  seq.insert(seq.end(), 4, lo);
  seq.insert(seq.end(), interior.begin(), interior.end());
  seq.insert(seq.end(), 4, hi);
  return seq;
}

KnotVector make_knots(double domain_lo, double domain_hi, int n_interior) {
  if (!std::isfinite(domain_lo) || !std::isfinite(domain_hi))
    throw std::invalid_argument("make_knots: non-finite domain bounds");
  if (!(domain_lo < domain_hi))
    throw std::invalid_argument("make_knots: domain_lo must be < domain_hi");
  if (n_interior < 0)
    throw std::invalid_argument("make_knots: negative interior knot count");

  KnotVector knots;
  knots.lo = domain_lo;
  knots.hi = domain_hi;
  knots.interior.resize(n_interior);
  for (int m = 1; m <= n_interior; ++m)
    knots.interior[m - 1] = domain_lo + (domain_hi - domain_lo) * m / (n_interior + 1);
  return knots;
}

namespace {

// Knot span index for x in [lo, hi]: largest i with seq[i] <= x < seq[i+1],
// clamped so the right boundary maps to the last nonvanishing cubic span.
int find_span(const std::vector<double>& seq, int n_basis, double x) {
  const int last = n_basis - 1;  // span index range is [3, n_basis - 1]
  if (x >= seq[n_basis]) return last;
  if (x <= seq[3]) return 3;
  auto it = std::upper_bound(seq.begin() + 3, seq.begin() + n_basis + 1, x);
  return static_cast<int>(it - seq.begin()) - 1;
}

// Values of the 4 cubic basis functions B_{span-3..span} at x (NURBS Book A2.2).
void cubic_basis_at(const std::vector<double>& seq, int span, double x, double out[4]) {
  double left[4], right[4];
  out[0] = 1.0;
  for (int d = 1; d <= 3; ++d) {
    left[d] = x - seq[span + 1 - d];
    right[d] = seq[span + d] - x;
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      double temp = out[r] / (right[r + 1] + left[d - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[d - r] * temp;
    }
    out[d] = saved;
  }
}

}  // namespace

BasisMatrix eval_basis(const KnotVector& knots, const TimeGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("eval_basis: empty grid");
  if (!grid.strictly_increasing())
    throw std::invalid_argument("eval_basis: grid points must be strictly increasing");

  const std::vector<double> seq = knots.full_sequence();
  const int p = knots.n_basis();
  const int j = grid.size();

  BasisMatrix basis;
  basis.grid = grid;
  basis.values = Matrix::Zero(j, p);

  for (int r = 0; r < j; ++r) {
    const double t = grid.points[r];
    if (!(t >= knots.lo && t <= knots.hi))
      throw std::invalid_argument("eval_basis: grid point " + std::to_string(t) +
                                  " outside knot domain [" + std::to_string(knots.lo) +
                                  ", " + std::to_string(knots.hi) + "]");
    const int span = find_span(seq, p, t);
    double vals[4];
    cubic_basis_at(seq, span, t, vals);
    for (int k = 0; k < 4; ++k) basis.values(r, span - 3 + k) = vals[k];
  }
  return basis;
}

CoefficientSet fit_coefficients(const BasisMatrix& basis, const CurveSet& curves) {
  const int j = basis.n_points();
  const int p = basis.n_basis();
  if (curves.n_points() != j)
    throw std::invalid_argument("fit_coefficients: curve length does not match basis grid");
  if (curves.n_curves() < 1)
    throw std::invalid_argument("fit_coefficients: empty curve set");
  if (j < p)
    throw numeric_error("fit_coefficients: fewer grid points than basis functions");
  if (curves.missing.has_value() && curves.missing->cast<int>().sum() > 0)
    throw std::invalid_argument("fit_coefficients: unimputed missing values present");
  if (!curves.values.allFinite())
    throw std::invalid_argument("fit_coefficients: non-finite curve values");

  // Rank tolerance is stated on B^T B; its smallest singular value is
  // sigma_min(B)^2.
  Eigen::JacobiSVD<Matrix> svd(basis.values);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) * sv(sv.size() - 1) < 1e-10 * sv(0) * sv(0))
    throw numeric_error("fit_coefficients: basis matrix is numerically rank deficient");

  Eigen::HouseholderQR<Matrix> qr(basis.values);
  CoefficientSet out;
  out.coefs = qr.solve(curves.values.transpose()).transpose();
  return out;
}

CurveSet reconstruct(const BasisMatrix& basis, const CoefficientSet& coefs) {
  if (coefs.dim() != basis.n_basis())
    throw std::invalid_argument("reconstruct: coefficient dimension does not match basis");
  CurveSet out;
  out.grid = basis.grid;
  out.values = coefs.coefs * basis.values.transpose();
  return out;
}

}  // namespace funoclust
