#pragma once

#include <cstdint>
#include <string>

#include "funoclust/types.hpp"

namespace funoclust {

/// Command-line run configuration. Defaults follow the standard benchmark
/// setup: 8 interior knots, 2 clusters, trimming cap 50, 10 KL bins.
struct RunConfig {
  std::string input_path;        // empty in simulate mode
  bool simulate = false;
  int n_interior_knots = 8;
  int n_clusters = 2;
  int max_outliers = 50;
  int n_bins = 10;
  std::uint64_t seed = 1;
  int replicates = 1;            // > 1 with simulate = benchmark mode
  bool impute_missing = false;
  std::string out_dir = ".";
};

/// Loads the curve CSV: row 1 is the time grid, each later row one curve,
/// empty cells are missing. With impute_missing, a missing cell becomes the
/// column mean over the non-missing curve values; otherwise missing cells
/// are an error.
CurveSet ingest(const std::string& path, bool impute_missing);

/// Runs the configured pipeline and writes labels.csv, kl_trace.csv,
/// coefficients.csv, fitted_curves.csv and summary.json into out_dir
/// (plus the dataset files in simulate mode, or benchmark.csv in benchmark
/// mode). Returns a process exit status: 0 success, 1 config/parse error,
/// 2 numeric degeneracy.
int run(const RunConfig& config);

/// Flag parsing plus run(); what main() calls. Exposed so tests can drive
/// the exact command-line surface in-process.
int cli_main(int argc, const char* const* argv);

}  // namespace funoclust
