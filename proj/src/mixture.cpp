#include "funoclust/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "funoclust/detail/rng.hpp"

namespace funoclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Cholesky factor plus log-determinant for one component, with a ridge of
// 1e-8 * trace / p added (and grown) until factorization succeeds. Mutates
// the covariance in place when a ridge is needed.
struct CompChol {
  Eigen::LLT<Matrix> llt;
  double log_det = 0.0;
};

CompChol factor_covariance(Matrix& cov) {
  const int p = static_cast<int>(cov.rows());
  const double trace = cov.trace();
  if (!(trace > 0.0) || !cov.allFinite())
    throw numeric_error("mixture: degenerate covariance (non-positive trace)");

  CompChol out;
  double ridge = 1e-8 * trace / p;
  for (int attempt = 0; attempt < 40; ++attempt) {
    out.llt.compute(cov);
    if (out.llt.info() == Eigen::Success) {
      const auto& l = out.llt.matrixLLT();
      double log_det = 0.0;
      bool positive = true;
      for (int k = 0; k < p; ++k) {
        const double d = l(k, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
          positive = false;
          break;
        }
        log_det += 2.0 * std::log(d);
      }
      if (positive) {
        out.log_det = log_det;
        return out;
      }
    }
    cov.diagonal().array() += ridge;
    ridge *= 2.0;
  }
  throw numeric_error("mixture: covariance not positive definite after regularization");
}

struct Workspace {
  std::vector<CompChol> chol;  // per component
  Matrix log_dens;             // n x G: log pi_g + log phi(b_i | ...)
  Matrix centered;             // n x p scratch
  Vector row_loglik;           // n
};

// Fills log_dens for all rows except skip_row and returns the mixture
// log-likelihood. Rows are processed per component with a single triangular
// solve over the whole block.
double e_step(const Matrix& x, int skip_row, const GmmParams& params, Workspace& ws,
              Matrix* resp_out) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int g = params.n_components();

  ws.log_dens.resize(n, g);
  for (int c = 0; c < g; ++c) {
    if (!(params.weights(c) > 0.0))
      throw numeric_error("mixture: component weight collapsed to zero");
    const double log_w = std::log(params.weights(c));
    const double base = -0.5 * (p * kLog2Pi + ws.chol[c].log_det);
    ws.centered = x.rowwise() - params.means[c].transpose();
    // Mahalanobis terms via L^{-1} applied to all centered rows at once.
    Matrix solved = ws.chol[c].llt.matrixL().solve(ws.centered.transpose());
    for (int i = 0; i < n; ++i)
      ws.log_dens(i, c) = log_w + base - 0.5 * solved.col(i).squaredNorm();
  }

  double loglik = 0.0;
  ws.row_loglik.resize(n);
  for (int i = 0; i < n; ++i) {
    if (i == skip_row) continue;
    double m = ws.log_dens.row(i).maxCoeff();
    double s = 0.0;
    for (int c = 0; c < g; ++c) s += std::exp(ws.log_dens(i, c) - m);
    ws.row_loglik(i) = m + std::log(s);
    loglik += ws.row_loglik(i);
  }
  if (!std::isfinite(loglik))
    throw numeric_error("mixture: non-finite log-likelihood");

  if (resp_out) {
    resp_out->resize(n, g);
    for (int i = 0; i < n; ++i) {
      if (i == skip_row) {
        resp_out->row(i).setZero();
        continue;
      }
      for (int c = 0; c < g; ++c)
        (*resp_out)(i, c) = std::exp(ws.log_dens(i, c) - ws.row_loglik(i));
    }
  }
  return loglik;
}

void m_step(const Matrix& x, int skip_row, const Matrix& resp, GmmParams& params) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int g = static_cast<int>(resp.cols());
  const double n_eff = static_cast<double>(skip_row >= 0 ? n - 1 : n);

  for (int c = 0; c < g; ++c) {
    const double n_c = resp.col(c).sum();
    if (!(n_c > 1e-8) || !std::isfinite(n_c))
      throw numeric_error("mixture: responsibility mass collapsed in component " +
                          std::to_string(c + 1));
    params.weights(c) = n_c / n_eff;
    Vector mean = (resp.col(c).transpose() * x).transpose() / n_c;
    Matrix cov = Matrix::Zero(p, p);
    for (int i = 0; i < n; ++i) {
      if (i == skip_row) continue;
      Vector d = x.row(i).transpose() - mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(d, resp(i, c));
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= n_c;
    params.means[c] = std::move(mean);
    params.covariances[c] = std::move(cov);
  }
}

std::vector<int> hard_labels(const Matrix& resp) {
  std::vector<int> labels(resp.rows());
  for (int i = 0; i < resp.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < resp.cols(); ++c)
      if (resp(i, c) > resp(i, best)) best = c;
    labels[i] = best + 1;
  }
  return labels;
}

// Closed-form single-component fit: mean and MLE covariance.
GmmFit fit_single_component(const Matrix& x, int skip_row) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const double n_eff = static_cast<double>(skip_row >= 0 ? n - 1 : n);

  GmmFit fit;
  fit.params.weights = Vector::Ones(1);
  Vector mean = Vector::Zero(p);
  for (int i = 0; i < n; ++i)
    if (i != skip_row) mean += x.row(i).transpose();
  mean /= n_eff;
  Matrix cov = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    if (i == skip_row) continue;
    Vector d = x.row(i).transpose() - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= n_eff;
  fit.params.means.push_back(std::move(mean));
  fit.params.covariances.push_back(std::move(cov));

  Workspace ws;
  ws.chol.resize(1);
  ws.chol[0] = factor_covariance(fit.params.covariances[0]);
  fit.loglik = e_step(x, skip_row, fit.params, ws, &fit.resp.probs);
  fit.loglik_trace.push_back(fit.loglik);
  fit.labels = hard_labels(fit.resp.probs);
  if (skip_row >= 0) fit.labels[skip_row] = 1;  // placeholder, row excluded from fit
  return fit;
}

struct EmRun {
  GmmParams params;
  Matrix resp;
  double loglik = 0.0;
  std::vector<double> trace;
};

EmRun run_em(const Matrix& x, int skip_row, GmmParams params, const EmOptions& opts) {
  EmRun run;
  Workspace ws;
  const int g = params.n_components();
  ws.chol.resize(g);

  double prev = 0.0;
  bool have_prev = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    for (int c = 0; c < g; ++c) ws.chol[c] = factor_covariance(params.covariances[c]);
    Matrix resp;
    const double loglik = e_step(x, skip_row, params, ws, &resp);
    run.trace.push_back(loglik);
    const bool converged =
        have_prev && std::abs(loglik - prev) <= opts.rel_tol * (std::abs(loglik) + 1.0);
    if (converged || it == opts.max_iter - 1) {
      run.params = std::move(params);
      run.resp = std::move(resp);
      run.loglik = loglik;
      return run;
    }
    prev = loglik;
    have_prev = true;
    m_step(x, skip_row, resp, params);
  }
  return run;  // unreachable for max_iter >= 1
}

// Random-centroid initialization: G distinct rows seed a one-pass nearest
// assignment; initial parameters come from that hard partition.
GmmParams init_params(const Matrix& x, int skip_row, int g, std::mt19937_64& rng) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());

  std::vector<int> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i)
    if (i != skip_row) rows.push_back(i);
  std::shuffle(rows.begin(), rows.end(), rng);

  std::vector<Vector> centroids(g);
  for (int c = 0; c < g; ++c) centroids[c] = x.row(rows[c]).transpose();

  std::vector<int> assign(n, -1);
  std::vector<int> counts(g, 0);
  for (int i : rows) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < g; ++c) {
      double d = (x.row(i).transpose() - centroids[c]).squaredNorm();
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    assign[i] = best_c;
    ++counts[best_c];
  }

  // Pooled fallback keeps near-empty seed clusters usable.
  Vector pooled_mean = Vector::Zero(p);
  for (int i : rows) pooled_mean += x.row(i).transpose();
  pooled_mean /= static_cast<double>(rows.size());
  Matrix pooled_cov = Matrix::Zero(p, p);
  for (int i : rows) {
    Vector d = x.row(i).transpose() - pooled_mean;
    pooled_cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  pooled_cov = pooled_cov.selfadjointView<Eigen::Lower>();
  pooled_cov /= static_cast<double>(rows.size());
  pooled_cov.diagonal().array() += 1e-8 * pooled_cov.trace() / p + 1e-12;

  GmmParams params;
  params.weights = Vector::Zero(g);
  params.means.resize(g);
  params.covariances.resize(g);
  for (int c = 0; c < g; ++c) {
    params.weights(c) = std::max(counts[c], 1) / static_cast<double>(rows.size());
    if (counts[c] == 0) {
      params.means[c] = centroids[c];
      params.covariances[c] = pooled_cov;
      continue;
    }
    Vector mean = Vector::Zero(p);
    for (int i : rows)
      if (assign[i] == c) mean += x.row(i).transpose();
    mean /= counts[c];
    if (counts[c] <= p) {
      params.means[c] = std::move(mean);
      params.covariances[c] = pooled_cov;
      continue;
    }
    Matrix cov = Matrix::Zero(p, p);
    for (int i : rows) {
      if (assign[i] != c) continue;
      Vector d = x.row(i).transpose() - mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= counts[c];
    cov.diagonal().array() += 1e-8 * cov.trace() / p + 1e-12;
    params.means[c] = std::move(mean);
    params.covariances[c] = std::move(cov);
  }
  params.weights /= params.weights.sum();
  return params;
}

GmmFit fit_gmm_impl(const Matrix& x, int skip_row, int n_components, const EmOptions& opts,
                    std::uint64_t seed) {
  const int n = static_cast<int>(x.rows()) - (skip_row >= 0 ? 1 : 0);
  if (n_components < 1) throw std::invalid_argument("fit_gmm: need at least 1 component");
  if (n < n_components)
    throw std::invalid_argument("fit_gmm: fewer rows than components");

  if (n_components == 1) return fit_single_component(x, skip_row);

  // Starts whose hard partition leaves some cluster at or below p+1 points
  // cannot support the downstream subset-log-likelihood distribution; they
  // lose to any adequately supported solution regardless of log-likelihood.
  const int p = static_cast<int>(x.cols());
  auto supported = [&](const Matrix& resp) {
    std::vector<int> counts(n_components, 0);
    for (int i = 0; i < resp.rows(); ++i) {
      if (i == skip_row) continue;
      int c = 0;
      for (int g = 1; g < n_components; ++g)
        if (resp(i, g) > resp(i, c)) c = g;
      ++counts[c];
    }
    for (int c : counts)
      if (c <= p + 1) return false;
    return true;
  };

  GmmFit best;
  bool have_best = false;
  bool best_supported = false;
  int n_restarts = 0;
  const int max_attempts = opts.n_starts * 3;
  int successes = 0;
  std::string last_error = "no attempt ran";

  for (int attempt = 0; attempt < max_attempts && successes < opts.n_starts; ++attempt) {
    std::mt19937_64 rng(detail::derive_seed(seed, attempt));
    try {
      GmmParams init = init_params(x, skip_row, n_components, rng);
      EmRun run = run_em(x, skip_row, std::move(init), opts);
      ++successes;
      const bool run_supported = supported(run.resp);
      const bool wins = !have_best ||
                        (run_supported && !best_supported) ||
                        (run_supported == best_supported && run.loglik > best.loglik);
      if (wins) {
        best.params = std::move(run.params);
        best.resp.probs = std::move(run.resp);
        best.loglik = run.loglik;
        best.loglik_trace = std::move(run.trace);
        have_best = true;
        best_supported = run_supported;
      }
    } catch (const numeric_error& err) {
      ++n_restarts;
      last_error = err.what();
    }
  }

  if (!have_best)
    throw numeric_error("fit_gmm: every start degenerated; last failure: " + last_error);
  best.labels = hard_labels(best.resp.probs);
  best.n_restarts = n_restarts;
  return best;
}

}  // namespace

GmmFit fit_gmm(const CoefficientSet& coefs, int n_components, const EmOptions& opts,
               std::uint64_t seed) {
  return fit_gmm_impl(coefs.coefs, -1, n_components, opts, seed);
}

GmmFit em_from(const CoefficientSet& coefs, const GmmParams& start, const EmOptions& opts,
               int skip_row) {
  const Matrix& x = coefs.coefs;
  if (start.n_components() < 1) throw std::invalid_argument("em_from: empty start parameters");
  if (start.dim() != x.cols()) throw std::invalid_argument("em_from: dimension mismatch");
  if (skip_row >= static_cast<int>(x.rows()))
    throw std::invalid_argument("em_from: skip_row out of range");

  if (start.n_components() == 1) return fit_single_component(x, skip_row);

  EmRun run = run_em(x, skip_row, start, opts);
  GmmFit fit;
  fit.params = std::move(run.params);
  fit.resp.probs = std::move(run.resp);
  fit.loglik = run.loglik;
  fit.loglik_trace = std::move(run.trace);
  fit.labels = hard_labels(fit.resp.probs);
  return fit;
}

double log_likelihood(const GmmParams& params, const CoefficientSet& coefs) {
  if (params.dim() != coefs.dim())
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  Workspace ws;
  const int g = params.n_components();
  ws.chol.resize(g);
  GmmParams copy = params;  // factoring may ridge the covariances
  for (int c = 0; c < g; ++c) ws.chol[c] = factor_covariance(copy.covariances[c]);
  return e_step(coefs.coefs, -1, copy, ws, nullptr);
}

double complete_data_log_likelihood(const GmmParams& params, const CoefficientSet& coefs,
                                    const std::vector<int>& labels) {
  const Matrix& x = coefs.coefs;
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int g = params.n_components();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("complete_data_log_likelihood: label count mismatch");

  std::vector<CompChol> chol(g);
  GmmParams copy = params;
  for (int c = 0; c < g; ++c) chol[c] = factor_covariance(copy.covariances[c]);

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int z = labels[i];
    if (z < 1 || z > g)
      throw std::invalid_argument("complete_data_log_likelihood: label " +
                                  std::to_string(z) + " out of range 1.." + std::to_string(g));
    const int c = z - 1;
    Vector d = x.row(i).transpose() - copy.means[c];
    const double maha = chol[c].llt.matrixL().solve(d).squaredNorm();
    total += std::log(copy.weights(c)) - 0.5 * (p * kLog2Pi + chol[c].log_det + maha);
  }
  return total;
}

ClusterStats cluster_stats(const CoefficientSet& coefs, const std::vector<int>& labels) {
  const Matrix& x = coefs.coefs;
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("cluster_stats: label count mismatch");

  int g = 0;
  for (int z : labels) {
    if (z < 1) throw std::invalid_argument("cluster_stats: labels must be in 1..G");
    g = std::max(g, z);
  }
  if (g == 0) throw std::invalid_argument("cluster_stats: empty label set");

  ClusterStats stats;
  stats.n_total = n;
  stats.clusters.resize(g);
  for (int c = 0; c < g; ++c) {
    auto& cl = stats.clusters[c];
    cl.mean = Vector::Zero(p);
    cl.sample_cov = Matrix::Zero(p, p);
  }
  for (int i = 0; i < n; ++i) {
    auto& cl = stats.clusters[labels[i] - 1];
    ++cl.size;
    cl.mean += x.row(i).transpose();
  }
  for (int c = 0; c < g; ++c) {
    auto& cl = stats.clusters[c];
    if (cl.size == 0)
      throw std::invalid_argument("cluster_stats: cluster " + std::to_string(c + 1) +
                                  " is empty");
    cl.mean /= cl.size;
    cl.pi_hat = static_cast<double>(cl.size) / n;
  }
  for (int i = 0; i < n; ++i) {
    auto& cl = stats.clusters[labels[i] - 1];
    Vector d = x.row(i).transpose() - cl.mean;
    cl.sample_cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  for (int c = 0; c < g; ++c) {
    auto& cl = stats.clusters[c];
    cl.sample_cov = cl.sample_cov.selfadjointView<Eigen::Lower>();
    if (cl.size > 1) cl.sample_cov /= cl.size - 1;
    // The subset-log-likelihood distribution needs n_h > p + 1; a non-PD
    // sample covariance is equally unusable for the beta component.
    cl.degenerate = cl.size <= p + 1;
    if (!cl.degenerate) {
      Eigen::LLT<Matrix> llt(cl.sample_cov);
      if (llt.info() != Eigen::Success) cl.degenerate = true;
    }
  }
  return stats;
}

}  // namespace funoclust
