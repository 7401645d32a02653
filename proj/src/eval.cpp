#include "funoclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "funoclust/detail/rng.hpp"

namespace funoclust {

namespace {

// Maps arbitrary label values to dense ids 0..k-1 in sorted label order.
std::vector<int> dense_ids(const Partition& labels, std::vector<int>& classes) {
  classes.assign(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<int> ids(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    ids[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) -
                              classes.begin());
  return ids;
}

inline std::uint64_t choose2(std::uint64_t m) { return m * (m - 1) / 2; }

}  // namespace

double ari(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: partition lengths differ");
  if (a.empty()) throw std::invalid_argument("ari: empty partitions");
  const std::uint64_t n = a.size();

  std::vector<int> classes_a, classes_b;
  const std::vector<int> ia = dense_ids(a, classes_a);
  const std::vector<int> ib = dense_ids(b, classes_b);
  const int ka = static_cast<int>(classes_a.size());
  const int kb = static_cast<int>(classes_b.size());

  std::vector<std::uint64_t> table(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<std::uint64_t> row(ka, 0), col(kb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++table[static_cast<std::size_t>(ia[i]) * kb + ib[i]];
    ++row[ia[i]];
    ++col[ib[i]];
  }

  std::uint64_t sum_cells = 0, sum_rows = 0, sum_cols = 0;
  for (std::uint64_t c : table) sum_cells += choose2(c);
  for (std::uint64_t r : row) sum_rows += choose2(r);
  for (std::uint64_t c : col) sum_cols += choose2(c);
  const std::uint64_t total = choose2(n);

  // Pair counts stay exact in integers; the expected-index product is taken
  // in 128-bit to avoid overflow before the final division.
  const long double expected =
      static_cast<long double>(static_cast<unsigned __int128>(sum_rows) * sum_cols) /
      static_cast<long double>(total);
  const long double max_index = (static_cast<long double>(sum_rows) + sum_cols) / 2.0L;
  const long double denom = max_index - expected;
  if (denom == 0.0L) return 1.0;  // both partitions trivial (all-one-class or all-singletons)
  return static_cast<double>((static_cast<long double>(sum_cells) - expected) / denom);
}

ConfusionMatrix confusion_matrix(const Partition& truth, const Partition& pred) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("confusion_matrix: partition lengths differ");
  ConfusionMatrix cm;
  const std::vector<int> it = dense_ids(truth, cm.truth_classes);
  const std::vector<int> ip = dense_ids(pred, cm.pred_classes);
  cm.counts = Eigen::MatrixXi::Zero(static_cast<int>(cm.truth_classes.size()),
                                    static_cast<int>(cm.pred_classes.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts(it[i], ip[i]);
  return cm;
}

OutlierRates outlier_rates(const Partition& truth, const Partition& pred) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("outlier_rates: partition lengths differ");
  std::int64_t n_goods = 0, n_outliers = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == kOutlierLabel) {
      ++n_outliers;
      if (pred[i] != kOutlierLabel) ++fn;
    } else {
      ++n_goods;
      if (pred[i] == kOutlierLabel) ++fp;
    }
  }
  OutlierRates rates;
  if (n_goods > 0) rates.false_positive_rate = static_cast<double>(fp) / n_goods;
  if (n_outliers > 0) rates.false_negative_rate = static_cast<double>(fn) / n_outliers;
  return rates;
}

namespace {

struct TkmState {
  std::vector<int> assign;     // nearest-centroid cluster per point, 0-based
  std::vector<char> trimmed;   // 1 = trimmed this iteration
  double objective = std::numeric_limits<double>::infinity();
};

// One concentration pass from given centroids; returns false on an empty
// cluster after trimming.
bool tkm_iterate(const Matrix& x, int n_trim, std::vector<Vector>& centroids,
                 TkmState& state) {
  const int n = static_cast<int>(x.rows());
  const int g = static_cast<int>(centroids.size());

  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_g = 0;
    for (int c = 0; c < g; ++c) {
      double d = (x.row(i).transpose() - centroids[c]).squaredNorm();
      if (d < best) {
        best = d;
        best_g = c;
      }
    }
    state.assign[i] = best_g;
    dist[i] = best;
  }

  // Trim the n_trim worst-fitting points; ties resolved by index for
  // deterministic output.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;
  });
  std::fill(state.trimmed.begin(), state.trimmed.end(), 0);
  for (int r = 0; r < n_trim; ++r) state.trimmed[order[r]] = 1;

  std::vector<Vector> sums(g, Vector::Zero(x.cols()));
  std::vector<int> counts(g, 0);
  double objective = 0.0;
  for (int i = 0; i < n; ++i) {
    if (state.trimmed[i]) continue;
    sums[state.assign[i]] += x.row(i).transpose();
    ++counts[state.assign[i]];
    objective += dist[i];
  }
  for (int c = 0; c < g; ++c) {
    if (counts[c] == 0) return false;
    centroids[c] = sums[c] / counts[c];
  }
  state.objective = objective;
  return true;
}

}  // namespace

Partition trimmed_kmeans(const CoefficientSet& coefs, int n_clusters, int n_trim,
                         std::uint64_t seed, const TrimmedKmeansOptions& opts) {
  const Matrix& x = coefs.coefs;
  const int n = static_cast<int>(x.rows());
  if (n_clusters < 1) throw std::invalid_argument("trimmed_kmeans: need at least 1 cluster");
  if (n_trim < 0) throw std::invalid_argument("trimmed_kmeans: negative trim count");
  if (n_trim >= n - n_clusters)
    throw std::invalid_argument("trimmed_kmeans: n_trim must be < n - G");

  TkmState best;
  std::vector<double> best_trace;
  bool any_success = false;
  const int max_attempts = opts.n_starts * 3;
  int successes = 0;

  for (int attempt = 0; attempt < max_attempts && successes < opts.n_starts; ++attempt) {
    std::mt19937_64 rng(detail::derive_seed(seed, attempt));
    std::vector<int> pick(n);
    std::iota(pick.begin(), pick.end(), 0);
    std::shuffle(pick.begin(), pick.end(), rng);
    std::vector<Vector> centroids(n_clusters);
    for (int c = 0; c < n_clusters; ++c) centroids[c] = x.row(pick[c]).transpose();

    TkmState state;
    state.assign.assign(n, -1);
    state.trimmed.assign(n, 0);
    bool ok = true;
    std::vector<double> trace;
    std::vector<int> prev_assign;
    std::vector<char> prev_trimmed;
    for (int it = 0; it < opts.max_iter; ++it) {
      prev_assign = state.assign;
      prev_trimmed = state.trimmed;
      if (!tkm_iterate(x, n_trim, centroids, state)) {
        ok = false;  // empty cluster: discard this start
        break;
      }
      trace.push_back(state.objective);
      if (state.assign == prev_assign && state.trimmed == prev_trimmed) break;
    }
    if (!ok) continue;
    ++successes;
    any_success = true;
    if (state.objective < best.objective) {
      best = state;
      best_trace = std::move(trace);
    }
  }
  if (opts.objective_trace) *opts.objective_trace = best_trace;

  if (!any_success)
    throw numeric_error("trimmed_kmeans: every start produced an empty cluster");

  Partition labels(n);
  for (int i = 0; i < n; ++i)
    labels[i] = best.trimmed[i] ? kOutlierLabel : best.assign[i] + 1;
  return labels;
}

}  // namespace funoclust
