#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "funoclust/types.hpp"

namespace funoclust {

/// Per-item class identifiers; kOutlierLabel marks trimmed points.
using Partition = std::vector<int>;

/// Hubert-Arabie adjusted Rand index. 1 for identical partitions (up to
/// relabeling), expected 0 under independent random labelings.
double ari(const Partition& a, const Partition& b);

/// Cross-tabulation of two partitions over their sorted distinct labels.
struct ConfusionMatrix {
  std::vector<int> truth_classes;
  std::vector<int> pred_classes;
  Eigen::MatrixXi counts;  // truth x pred
};

ConfusionMatrix confusion_matrix(const Partition& truth, const Partition& pred);

/// Outlier detection error rates. A rate is absent when its denominator is
/// empty (no true goods / no true outliers).
struct OutlierRates {
  std::optional<double> false_positive_rate;  // goods flagged as outliers / goods
  std::optional<double> false_negative_rate;  // outliers missed / outliers
};

OutlierRates outlier_rates(const Partition& truth, const Partition& pred);

struct TrimmedKmeansOptions {
  int n_starts = 10;
  int max_iter = 200;
  // When set, receives the winning start's trimmed-WCSS value per iteration.
  std::vector<double>* objective_trace = nullptr;
};

/// Trimmed k-means on coefficient rows: assign to nearest centroid, trim the
/// n_trim points with largest distance to their assigned centroid, recompute
/// centroids from the untrimmed points, iterate to a fixed point. Best of
/// n_starts seeded starts by trimmed within-cluster sum of squares. Trimmed
/// points receive kOutlierLabel, the rest 1..G.
Partition trimmed_kmeans(const CoefficientSet& coefs, int n_clusters, int n_trim,
                         std::uint64_t seed, const TrimmedKmeansOptions& opts = {});

}  // namespace funoclust
