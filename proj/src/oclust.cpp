#include "funoclust/oclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "funoclust/detail/parallel.hpp"
#include "funoclust/detail/rng.hpp"

namespace funoclust {

SubsetLogliks subset_logliks(const CoefficientSet& coefs, int n_components,
                             const GmmParams& warm, std::uint64_t seed,
                             const EmOptions& opts, int n_threads) {
  const int n = coefs.n_curves();
  if (n < 2) throw std::invalid_argument("subset_logliks: need at least 2 rows");
  if (warm.n_components() != n_components)
    throw std::invalid_argument("subset_logliks: warm start has wrong component count");

  SubsetLogliks out;
  out.values.assign(n, 0.0);
  std::vector<char> fell_back(n, 0);

  detail::parallel_for(
      n,
      [&](int j) {
        try {
          GmmFit fit = em_from(coefs, warm, opts, j);
          out.values[j] = fit.loglik;
        } catch (const numeric_error&) {
          // Warm refit collapsed; fall back to a fresh multi-start fit on the
          // subset, seeded deterministically per row.
          CoefficientSet subset;
          subset.coefs.resize(n - 1, coefs.dim());
          subset.coefs.topRows(j) = coefs.coefs.topRows(j);
          subset.coefs.bottomRows(n - 1 - j) = coefs.coefs.bottomRows(n - 1 - j);
          GmmFit fit = fit_gmm(subset, n_components, opts, detail::derive_seed(seed, j));
          out.values[j] = fit.loglik;
          fell_back[j] = 1;
        }
      },
      n_threads);

  for (int j = 0; j < n; ++j)
    if (fell_back[j]) out.fresh_restarts.push_back(j);
  return out;
}

int candidate_outlier(const std::vector<double>& subset_logliks) {
  if (subset_logliks.empty())
    throw std::invalid_argument("candidate_outlier: empty log-likelihood vector");
  int best = 0;
  for (int j = 1; j < static_cast<int>(subset_logliks.size()); ++j)
    if (subset_logliks[j] > subset_logliks[best]) best = j;
  return best;
}

std::vector<double> d_values(const std::vector<double>& subset_logliks, double full_loglik) {
  std::vector<double> d(subset_logliks.size());
  for (std::size_t j = 0; j < subset_logliks.size(); ++j)
    d[j] = subset_logliks[j] - full_loglik;
  return d;
}

namespace {

Matrix drop_row(const Matrix& m, int row) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(row) = m.topRows(row);
  out.bottomRows(m.rows() - 1 - row) = m.bottomRows(m.rows() - 1 - row);
  return out;
}

}  // namespace

OclustResult trim_outliers(const CoefficientSet& coefs, int n_components, int max_outliers,
                           std::uint64_t seed, const OclustOptions& opts) {
  const int n = coefs.n_curves();
  const int p = coefs.dim();
  const int k = p - 4;  // interior knots of the producing basis
  if (n_components < 1) throw std::invalid_argument("trim_outliers: need at least 1 cluster");
  if (max_outliers < 0) throw std::invalid_argument("trim_outliers: negative max_outliers");
  if (max_outliers >= n - n_components * (k + 6))
    throw std::invalid_argument(
        "trim_outliers: max_outliers too large for valid beta parameters (need F < n - G*(K+6))");

  OclustResult result;
  CoefficientSet retained = coefs;
  std::vector<char> eligible;
  std::vector<int> orig_idx(n);
  for (int i = 0; i < n; ++i) orig_idx[i] = i;

  for (int t = 0; t <= max_outliers; ++t) {
    const std::uint64_t fit_seed = detail::derive_seed(seed, 2 * t);
    const std::uint64_t subset_seed = detail::derive_seed(seed, 2 * t + 1);

    GmmFit fit = fit_gmm(retained, n_components, opts.em, fit_seed);
    ClusterStats stats = cluster_stats(retained, fit.labels);
    BetaMixtureBuild build = build_d_mixture(stats, k);
    result.n_excluded_components += static_cast<int>(build.excluded_clusters.size());

    SubsetLogliks sub =
        subset_logliks(retained, n_components, fit.params, subset_seed, opts.em, opts.n_threads);
    result.n_fresh_restarts += static_cast<int>(sub.fresh_restarts.size());
    std::vector<double> d = d_values(sub.values, fit.loglik);

    // Points in clusters without a usable beta component sit outside the
    // derived mixture; their d values are left out of this iteration's KL.
    std::vector<double> d_kl;
    if (build.excluded_clusters.empty()) {
      d_kl = d;
    } else {
      d_kl.reserve(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        const int cluster = fit.labels[i];
        if (std::find(build.excluded_clusters.begin(), build.excluded_clusters.end(),
                      cluster) == build.excluded_clusters.end())
          d_kl.push_back(d[i]);
      }
    }

    double kl = std::numeric_limits<double>::infinity();
    if (!build.mixture.components.empty() &&
        static_cast<int>(d_kl.size()) >= opts.n_bins) {
      kl = kl_divergence(d_kl, build.mixture, opts.n_bins);
    }
    result.kl_trace.push_back(kl);
    // A KL computed after dropping an unsupported cluster covers only part of
    // the sample; such iterations stay in the trace but cannot be selected.
    eligible.push_back(build.excluded_clusters.empty() && std::isfinite(kl));
    result.d_samples.push_back(std::move(d));

    if (t < max_outliers) {
      const int worst = candidate_outlier(sub.values);
      result.removal_sequence.push_back(orig_idx[worst]);
      retained.coefs = drop_row(retained.coefs, worst);
      orig_idx.erase(orig_idx.begin() + worst);
    }
  }

  // Argmin of the KL trace over eligible iterations; exact ties resolve
  // toward fewer removals. When no iteration is eligible, fall back to the
  // finite entries.
  auto argmin_where = [&](auto&& keep) {
    int best = -1;
    for (int t = 0; t < static_cast<int>(result.kl_trace.size()); ++t) {
      if (!keep(t)) continue;
      if (best < 0 || result.kl_trace[t] < result.kl_trace[best]) best = t;
    }
    return best;
  };
  int best_t = argmin_where([&](int t) { return static_cast<bool>(eligible[t]); });
  if (best_t < 0)
    best_t = argmin_where([&](int t) { return std::isfinite(result.kl_trace[t]); });
  if (best_t < 0)
    throw numeric_error("trim_outliers: KL divergence undefined at every iteration");
  result.best_iteration = best_t;

  // Report a path-independent model: fresh multi-start fit on the retained
  // set at the selected iteration.
  std::vector<char> removed(n, 0);
  for (int t = 0; t < best_t; ++t) removed[result.removal_sequence[t]] = 1;
  CoefficientSet best_set;
  best_set.coefs.resize(n - best_t, p);
  std::vector<int> kept;
  kept.reserve(n - best_t);
  for (int i = 0; i < n; ++i)
    if (!removed[i]) kept.push_back(i);
  for (std::size_t r = 0; r < kept.size(); ++r) best_set.coefs.row(r) = coefs.coefs.row(kept[r]);

  GmmFit final_fit =
      fit_gmm(best_set, n_components, opts.em, detail::derive_seed(seed, 0x0f1e2d3cULL));
  result.final_params = std::move(final_fit.params);
  result.final_loglik = final_fit.loglik;
  result.final_labels.assign(n, kOutlierLabel);
  for (std::size_t r = 0; r < kept.size(); ++r)
    result.final_labels[kept[r]] = final_fit.labels[r];
  return result;
}

OclustResult run_funoclust(const CurveSet& curves, const KnotVector& knots, int n_components,
                           int max_outliers, std::uint64_t seed, const OclustOptions& opts) {
  BasisMatrix basis = eval_basis(knots, curves.grid);
  CoefficientSet coefs = fit_coefficients(basis, curves);
  return trim_outliers(coefs, n_components, max_outliers, seed, opts);
}

}  // namespace funoclust
