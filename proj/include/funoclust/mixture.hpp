#pragma once

#include <cstdint>
#include <vector>

#include "funoclust/types.hpp"

namespace funoclust {

/// Full-covariance Gaussian mixture parameters. Each covariance absorbs the
/// basis-induced term, so components carry one free SPD matrix each.
struct GmmParams {
  Vector weights;                   // G entries, positive, sum to 1
  std::vector<Vector> means;        // G vectors of dimension p
  std::vector<Matrix> covariances;  // G SPD p x p matrices

  int n_components() const { return static_cast<int>(means.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

/// Posterior component membership probabilities; rows sum to 1.
struct Responsibilities {
  Matrix probs;  // n x G
};

struct EmOptions {
  int n_starts = 10;     // random centroid-seeded initializations
  int max_iter = 500;    // EM iterations per start
  double rel_tol = 1e-8; // relative log-likelihood change for convergence
};

struct GmmFit {
  GmmParams params;
  Responsibilities resp;
  std::vector<int> labels;           // hard assignments, 1..G
  double loglik = 0.0;               // mixture log-likelihood at convergence
  std::vector<double> loglik_trace;  // per-iteration values of the winning start
  int n_restarts = 0;                // degenerate starts that were reseeded
};

/// EM fit of a G-component full-covariance Gaussian mixture to coefficient
/// rows. Runs opts.n_starts seeded initializations to full convergence and
/// returns the best final log-likelihood. Degenerate starts (collapsed
/// responsibility mass, irreparably singular covariance) are redrawn from
/// fresh derived seeds; throws numeric_error when every attempt degenerates.
GmmFit fit_gmm(const CoefficientSet& coefs, int n_components, const EmOptions& opts,
               std::uint64_t seed);

/// Continues EM from the given parameters until convergence, optionally
/// skipping one row of the data. Used for warm-started leave-one-out refits.
/// Throws numeric_error on degeneracy instead of restarting.
GmmFit em_from(const CoefficientSet& coefs, const GmmParams& start, const EmOptions& opts,
               int skip_row = -1);

/// Sum over rows of log sum_g pi_g phi(b_i | mu_g, Sigma_g), evaluated with
/// log-sum-exp and cached Cholesky factors.
double log_likelihood(const GmmParams& params, const CoefficientSet& coefs);

/// Eq.-style hard-assignment log-likelihood:
/// sum_i [log pi_{z_i} + log phi(b_i | mu_{z_i}, Sigma_{z_i})].
double complete_data_log_likelihood(const GmmParams& params, const CoefficientSet& coefs,
                                    const std::vector<int>& labels);

/// Per-cluster summary statistics under hard labels 1..G. Sample covariances
/// use the n_h - 1 divisor.
struct ClusterStats {
  struct Cluster {
    int size = 0;        // n_h
    double pi_hat = 0.0; // n_h / n
    Vector mean;
    Matrix sample_cov;   // divisor n_h - 1
    bool degenerate = false;  // n_h <= p + 1, or sample_cov not positive definite
  };
  std::vector<Cluster> clusters;
  int n_total = 0;
};

/// Labels must cover 1..max(labels) with every cluster nonempty.
ClusterStats cluster_stats(const CoefficientSet& coefs, const std::vector<int>& labels);

}  // namespace funoclust
