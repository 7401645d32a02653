#pragma once

#include <cstdint>
#include <vector>

#include "funoclust/basis.hpp"
#include "funoclust/betadist.hpp"
#include "funoclust/mixture.hpp"
#include "funoclust/types.hpp"

namespace funoclust {

/// Leave-one-out log-likelihoods: entry j is the converged mixture
/// log-likelihood after refitting with row j removed.
struct SubsetLogliks {
  std::vector<double> values;
  std::vector<int> fresh_restarts;  // rows whose warm-started refit degenerated
};

/// Refits the mixture once per left-out row, warm-started at the converged
/// full-set parameters. Rows are processed in parallel; a degenerate warm
/// refit falls back to a fresh multi-start fit seeded per row.
SubsetLogliks subset_logliks(const CoefficientSet& coefs, int n_components,
                             const GmmParams& warm, std::uint64_t seed,
                             const EmOptions& opts = {}, int n_threads = 0);

/// Index (0-based) of the largest subset log-likelihood; ties break toward
/// the lowest index.
int candidate_outlier(const std::vector<double>& subset_logliks);

/// d_j = subset log-likelihood j minus the full-set log-likelihood.
std::vector<double> d_values(const std::vector<double>& subset_logliks, double full_loglik);

struct OclustOptions {
  int n_bins = 10;   // KL histogram bins
  EmOptions em;
  int n_threads = 0; // 0 = hardware concurrency
};

struct OclustResult {
  std::vector<double> kl_trace;        // entry t = KL with t points removed
  std::vector<int> removal_sequence;   // original curve indices in removal order
  int best_iteration = 0;              // argmin of kl_trace; ties favor fewer removals
  std::vector<int> final_labels;       // per original curve: 1..G or kOutlierLabel
  GmmParams final_params;              // fresh multi-start fit at best_iteration
  double final_loglik = 0.0;
  std::vector<std::vector<double>> d_samples;  // per-iteration diagnostics
  int n_excluded_components = 0;  // beta components dropped for undersized clusters
  int n_fresh_restarts = 0;       // warm subset refits that needed a fresh fit
};

/// Iterative trimming on an already-fitted coefficient set: fit the mixture,
/// score the derived D distribution against the observed one, remove the
/// candidate outlier, and repeat max_outliers times. The reported model is
/// the iteration minimizing the KL trace.
OclustResult trim_outliers(const CoefficientSet& coefs, int n_components, int max_outliers,
                           std::uint64_t seed, const OclustOptions& opts = {});

/// Full pipeline: evaluate the clamped cubic basis on the curve grid, fit
/// per-curve coefficients by OLS, then run the trimming loop.
OclustResult run_funoclust(const CurveSet& curves, const KnotVector& knots, int n_components,
                           int max_outliers, std::uint64_t seed, const OclustOptions& opts = {});

}  // namespace funoclust
