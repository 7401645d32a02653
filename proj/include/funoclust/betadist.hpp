#pragma once

#include <vector>

#include "funoclust/mixture.hpp"
#include "funoclust/types.hpp"

namespace funoclust {

/// One shifted/scaled beta component of the distribution of subset
/// log-likelihood differences. Valid only when cluster_size > K + 5.
struct BetaComponent {
  int cluster_size = 0;       // n_h
  int n_interior_knots = 0;   // K
  double pi_hat = 0.0;
  double weight = 0.0;        // mixing weight within the D mixture
  double shift = 0.0;         // lower support endpoint
  double scale = 0.0;         // 2 n_h / (n_h - 1)^2
  double shape1 = 0.0;        // (K + 4) / 2
  double shape2 = 0.0;        // (n_h - K - 5) / 2

  double support_lo() const { return shift; }
  double support_hi() const { return shift + 1.0 / scale; }
};

/// Mixture of shifted/scaled beta components; weights sum to 1.
struct BetaMixture {
  std::vector<BetaComponent> components;

  double support_lo() const;
  double support_hi() const;
};

/// Beta component induced by one cluster's summary statistics. Throws
/// std::domain_error when the n_h > K+5 support condition fails or the
/// sample covariance has non-positive determinant.
BetaComponent beta_component_params(const ClusterStats::Cluster& cluster,
                                    int n_interior_knots);

/// Builds the mixture over all usable clusters; unusable clusters (size
/// <= K+5 or singular covariance) are reported by 1-based index and the
/// remaining weights renormalized.
struct BetaMixtureBuild {
  BetaMixture mixture;
  std::vector<int> excluded_clusters;
};

BetaMixtureBuild build_d_mixture(const ClusterStats& stats, int n_interior_knots);

/// Mixture density of D at d; zero outside every component's support.
/// Per-component densities carry the affine Jacobian so each integrates to 1.
double d_mixture_density(double d, const BetaMixture& mixture);

/// Binned Kullback-Leibler divergence of an observed D sample from the
/// derived mixture: n_bins equal-width bins over the union of supports,
/// empirical frequencies (out-of-support values clamped into the nearest
/// edge bin) against quadrature bin masses floored at 1e-12.
double kl_divergence(const std::vector<double>& d_sample, const BetaMixture& mixture,
                     int n_bins);

}  // namespace funoclust
