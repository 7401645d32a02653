#include "funoclust/betadist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace funoclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Standard beta pdf on (0, 1); endpoints return 0 (shape1 >= 2 always holds
// here, so the left endpoint is exact; the right endpoint can diverge for
// shape2 < 1 and is treated as a removable quadrature boundary).
double beta_pdf(double x, double a, double b) {
  if (!(x > 0.0) || !(x < 1.0)) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                  log_beta_function(a, b));
}

// Adaptive Simpson integration of f over [lo, hi].
template <typename F>
double simpson_rec(const F& f, double lo, double hi, double flo, double fmid, double fhi,
                   double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
  const double flmid = f(lmid), frmid = f(rmid);
  const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, lo, mid, flo, flmid, fmid, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, mid, hi, fmid, frmid, fhi, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double lo, double hi, double tol = 1e-10, int depth = 48) {
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo), fmid = f(mid), fhi = f(hi);
  const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol, depth);
}

}  // namespace

double BetaMixture::support_lo() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& c : components) lo = std::min(lo, c.support_lo());
  return lo;
}

double BetaMixture::support_hi() const {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : components) hi = std::max(hi, c.support_hi());
  return hi;
}

BetaComponent beta_component_params(const ClusterStats::Cluster& cluster,
                                    int n_interior_knots) {
  const int n_h = cluster.size;
  const int k = n_interior_knots;
  const int p = k + 4;
  if (n_h <= k + 5)
    throw std::domain_error("beta_component_params: cluster size " + std::to_string(n_h) +
                            " violates n_h > K+5 (= " + std::to_string(k + 5) + ")");
  if (cluster.sample_cov.rows() != p)
    throw std::invalid_argument("beta_component_params: covariance dimension != K+4");

  Eigen::LLT<Matrix> llt(cluster.sample_cov);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("beta_component_params: sample covariance not positive definite");
  double log_det = 0.0;
  for (int i = 0; i < p; ++i) {
    const double d = llt.matrixLLT()(i, i);
    if (!(d > 0.0)) throw std::domain_error("beta_component_params: |S_h| <= 0");
    log_det += 2.0 * std::log(d);
  }

  BetaComponent comp;
  comp.cluster_size = n_h;
  comp.n_interior_knots = k;
  comp.pi_hat = cluster.pi_hat;
  comp.weight = cluster.pi_hat;
  comp.shift = -std::log(cluster.pi_hat) + 0.5 * p * kLog2Pi + 0.5 * log_det;
  const double nm1 = static_cast<double>(n_h - 1);
  comp.scale = 2.0 * n_h / (nm1 * nm1);
  comp.shape1 = 0.5 * p;
  comp.shape2 = 0.5 * (n_h - k - 5);
  return comp;
}

BetaMixtureBuild build_d_mixture(const ClusterStats& stats, int n_interior_knots) {
  BetaMixtureBuild out;
  double total_weight = 0.0;
  for (std::size_t c = 0; c < stats.clusters.size(); ++c) {
    try {
      BetaComponent comp = beta_component_params(stats.clusters[c], n_interior_knots);
      total_weight += comp.weight;
      out.mixture.components.push_back(comp);
    } catch (const std::domain_error&) {
      out.excluded_clusters.push_back(static_cast<int>(c) + 1);
    }
  }
  for (auto& comp : out.mixture.components) comp.weight /= total_weight;
  return out;
}

double d_mixture_density(double d, const BetaMixture& mixture) {
  double density = 0.0;
  for (const auto& comp : mixture.components) {
    const double x = comp.scale * (d - comp.shift);
    density += comp.weight * comp.scale * beta_pdf(x, comp.shape1, comp.shape2);
  }
  return density;
}

double kl_divergence(const std::vector<double>& d_sample, const BetaMixture& mixture,
                     int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("kl_divergence: need at least 2 bins");
  if (static_cast<int>(d_sample.size()) < n_bins)
    throw std::invalid_argument("kl_divergence: sample smaller than bin count");
  if (mixture.components.empty())
    throw std::invalid_argument("kl_divergence: empty mixture");

  const double lo = mixture.support_lo();
  const double hi = mixture.support_hi();
  const double width = (hi - lo) / n_bins;
  if (!(width > 0.0) || !std::isfinite(width))
    throw numeric_error("kl_divergence: degenerate support interval");

  // Empirical bin probabilities; values outside the support are clamped into
  // the nearest edge bin so the empirical measure stays a probability measure.
  std::vector<double> p_emp(n_bins, 0.0);
  for (double d : d_sample) {
    int bin = static_cast<int>(std::floor((d - lo) / width));
    bin = std::clamp(bin, 0, n_bins - 1);
    p_emp[bin] += 1.0;
  }
  for (double& p : p_emp) p /= static_cast<double>(d_sample.size());

  double theo_total = 0.0;
  std::vector<double> p_theo(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    const double a = lo + b * width;
    const double z = (b == n_bins - 1) ? hi : lo + (b + 1) * width;
    double mass = integrate([&](double d) { return d_mixture_density(d, mixture); }, a, z);
    p_theo[b] = std::max(mass, 1e-12);
    theo_total += p_theo[b];
  }
  if (theo_total < 1e-9)
    throw numeric_error("kl_divergence: theoretical mass numerically zero on all bins");

  double kl = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    if (p_emp[b] > 0.0) kl += p_emp[b] * std::log(p_emp[b] / p_theo[b]);
  }
  // The quadrature mass can overshoot 1 by its tolerance, which would push an
  // exact-match sample epsilon below zero.
  return std::max(kl, 0.0);
}

}  // namespace funoclust
