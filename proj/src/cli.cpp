#include "funoclust/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "funoclust/basis.hpp"
#include "funoclust/csv.hpp"
#include "funoclust/detail/rng.hpp"
#include "funoclust/eval.hpp"
#include "funoclust/oclust.hpp"
#include "funoclust/simgen.hpp"

namespace funoclust {

CurveSet ingest(const std::string& path, bool impute_missing) {
  CsvTable table = read_numeric_csv(path);
  if (table.size() < 2)
    throw std::invalid_argument(path + ": need a grid row plus at least one curve row");

  const std::size_t j = table.front().size();
  CurveSet curves;
  curves.grid.points.resize(j);
  for (std::size_t c = 0; c < j; ++c) {
    if (!table[0][c].has_value())
      throw std::invalid_argument(path + ": row 1: time grid has a missing cell");
    curves.grid.points[c] = *table[0][c];
  }
  if (!curves.grid.strictly_increasing())
    throw std::invalid_argument(path + ": row 1: time grid must be strictly increasing");

  const int n = static_cast<int>(table.size()) - 1;
  curves.values.resize(n, static_cast<int>(j));
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask(n, static_cast<int>(j));
  mask.setZero();
  bool any_missing = false;
  for (int r = 0; r < n; ++r) {
    const auto& row = table[r + 1];
    if (row.size() != j)
      throw std::invalid_argument(path + ": row " + std::to_string(r + 2) + ": has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(j));
    for (std::size_t c = 0; c < j; ++c) {
      if (row[c].has_value()) {
        curves.values(r, static_cast<int>(c)) = *row[c];
      } else {
        curves.values(r, static_cast<int>(c)) = 0.0;
        mask(r, static_cast<int>(c)) = 1;
        any_missing = true;
      }
    }
  }

  if (any_missing) {
    if (!impute_missing)
      throw std::invalid_argument(path +
                                  ": missing values present; rerun with --impute to fill "
                                  "them with column means");
    for (std::size_t c = 0; c < j; ++c) {
      double sum = 0.0;
      int count = 0;
      for (int r = 0; r < n; ++r) {
        if (!mask(r, static_cast<int>(c))) {
          sum += curves.values(r, static_cast<int>(c));
          ++count;
        }
      }
      if (count == 0)
        throw std::invalid_argument(path + ": column " + std::to_string(c + 1) +
                                    " is entirely missing; cannot impute");
      const double mean = sum / count;
      for (int r = 0; r < n; ++r)
        if (mask(r, static_cast<int>(c))) curves.values(r, static_cast<int>(c)) = mean;
    }
    // Cells are filled; the set carries no missing mask downstream.
  }
  return curves;
}

namespace {

std::string label_to_string(int label) {
  return label == kOutlierLabel ? std::string("OUTLIER") : std::to_string(label);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

struct RunArtifacts {
  OclustResult result;
  CoefficientSet coefs;
  CurveSet fitted;
};

RunArtifacts run_pipeline(const CurveSet& curves, const RunConfig& cfg, std::uint64_t seed) {
  KnotVector knots = make_knots(curves.grid.lo(), curves.grid.hi(), cfg.n_interior_knots);
  BasisMatrix basis = eval_basis(knots, curves.grid);

  RunArtifacts art;
  art.coefs = fit_coefficients(basis, curves);
  art.fitted = reconstruct(basis, art.coefs);

  OclustOptions opts;
  opts.n_bins = cfg.n_bins;
  art.result = trim_outliers(art.coefs, cfg.n_clusters, cfg.max_outliers, seed, opts);
  return art;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::string body = "curve,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    body += std::to_string(i) + "," + label_to_string(labels[i]) + "\n";
  write_text_atomic(path, body);
}

void write_kl_trace_csv(const std::string& path, const OclustResult& result) {
  std::string body = "iteration,kl,removed\n";
  for (std::size_t t = 0; t < result.kl_trace.size(); ++t) {
    body += std::to_string(t) + "," + format_number(result.kl_trace[t]) + ",";
    if (t < result.removal_sequence.size())
      body += std::to_string(result.removal_sequence[t]);
    body += "\n";
  }
  write_text_atomic(path, body);
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {{"input", cfg.input_path},
          {"simulate", cfg.simulate},
          {"knots", cfg.n_interior_knots},
          {"clusters", cfg.n_clusters},
          {"max_outliers", cfg.max_outliers},
          {"bins", cfg.n_bins},
          {"seed", cfg.seed},
          {"replicates", cfg.replicates},
          {"impute", cfg.impute_missing},
          {"out_dir", cfg.out_dir}};
}

void write_single_run(const std::filesystem::path& dir, const RunConfig& cfg,
                      const RunArtifacts& art, const std::vector<int>* truth) {
  const OclustResult& res = art.result;
  write_labels_csv((dir / "labels.csv").string(), res.final_labels);
  write_kl_trace_csv((dir / "kl_trace.csv").string(), res);
  write_matrix_csv((dir / "coefficients.csv").string(), art.coefs.coefs);
  write_curves_csv((dir / "fitted_curves.csv").string(), art.fitted);

  int n_outliers = 0;
  std::vector<int> cluster_sizes(cfg.n_clusters, 0);
  for (int label : res.final_labels) {
    if (label == kOutlierLabel)
      ++n_outliers;
    else
      ++cluster_sizes[label - 1];
  }

  nlohmann::json summary = {
      {"best_iteration", res.best_iteration},
      {"outlier_count", n_outliers},
      {"final_loglik", res.final_loglik},
      {"cluster_sizes", cluster_sizes},
      {"kl_min", res.kl_trace[res.best_iteration]},
      {"n_fresh_restarts", res.n_fresh_restarts},
      {"n_excluded_components", res.n_excluded_components},
      {"seed", cfg.seed},
      {"config", config_json(cfg)},
      {"timestamp", iso_timestamp()},
  };
  if (truth) {
    summary["ari_full"] = ari(*truth, res.final_labels);
    Partition truth_good, pred_good;
    for (std::size_t i = 0; i < truth->size(); ++i) {
      if ((*truth)[i] != kOutlierLabel && res.final_labels[i] != kOutlierLabel) {
        truth_good.push_back((*truth)[i]);
        pred_good.push_back(res.final_labels[i]);
      }
    }
    if (!truth_good.empty()) summary["ari_non_outlier"] = ari(truth_good, pred_good);
    OutlierRates rates = outlier_rates(*truth, res.final_labels);
    if (rates.false_positive_rate) summary["false_positive_rate"] = *rates.false_positive_rate;
    if (rates.false_negative_rate) summary["false_negative_rate"] = *rates.false_negative_rate;
  }
  write_text_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
}

int run_benchmark(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::string body =
      "replicate,seed,ari,fp_rate,fn_rate,predicted_outliers,ari_tkmeans\n";
  std::vector<double> aris, fps, fns, counts, tk_aris;

  for (int r = 0; r < cfg.replicates; ++r) {
    const std::uint64_t rep_seed = detail::derive_seed(cfg.seed, 1000 + r);
    SimConfig sim;
    sim.seed = rep_seed;
    LabeledCurveSet data = generate(sim);
    RunArtifacts art = run_pipeline(data.curves, cfg, rep_seed);

    const double a = ari(data.labels, art.result.final_labels);
    OutlierRates rates = outlier_rates(data.labels, art.result.final_labels);
    const double fp = rates.false_positive_rate.value_or(0.0);
    const double fn = rates.false_negative_rate.value_or(0.0);
    int pred_outliers = 0;
    for (int label : art.result.final_labels)
      if (label == kOutlierLabel) ++pred_outliers;

    Partition tk = trimmed_kmeans(art.coefs, cfg.n_clusters, 25,
                                  detail::derive_seed(rep_seed, 77));
    const double tk_a = ari(data.labels, tk);

    aris.push_back(a);
    fps.push_back(fp);
    fns.push_back(fn);
    counts.push_back(pred_outliers);
    tk_aris.push_back(tk_a);
    body += std::to_string(r) + "," + std::to_string(rep_seed) + "," + format_number(a) +
            "," + format_number(fp) + "," + format_number(fn) + "," +
            std::to_string(pred_outliers) + "," + format_number(tk_a) + "\n";
    std::cerr << "replicate " << r << ": ari=" << a << " fp=" << fp << " fn=" << fn
              << " outliers=" << pred_outliers << " tkmeans_ari=" << tk_a << "\n";
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto sd = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  body += "mean,," + format_number(mean(aris)) + "," + format_number(mean(fps)) + "," +
          format_number(mean(fns)) + "," + format_number(mean(counts)) + "," +
          format_number(mean(tk_aris)) + "\n";
  body += "sd,," + format_number(sd(aris)) + "," + format_number(sd(fps)) + "," +
          format_number(sd(fns)) + "," + format_number(sd(counts)) + "," +
          format_number(sd(tk_aris)) + "\n";
  write_text_atomic((dir / "benchmark.csv").string(), body);
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    if (!cfg.simulate && cfg.input_path.empty()) {
      std::cerr << "error: provide --input FILE or --simulate\n";
      return 1;
    }
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    if (cfg.simulate && cfg.replicates > 1) return run_benchmark(dir, cfg);

    std::optional<std::vector<int>> truth;
    CurveSet curves;
    if (cfg.simulate) {
      SimConfig sim;
      sim.seed = cfg.seed;
      LabeledCurveSet data = generate(sim);
      curves = std::move(data.curves);
      truth = std::move(data.labels);
      write_curves_csv((dir / "simulated_curves.csv").string(), curves);
      std::string truth_body = "curve,label\n";
      for (std::size_t i = 0; i < truth->size(); ++i)
        truth_body += std::to_string(i) + "," + label_to_string((*truth)[i]) + "\n";
      write_text_atomic((dir / "truth_labels.csv").string(), truth_body);
    } else {
      curves = ingest(cfg.input_path, cfg.impute_missing);
    }

    RunArtifacts art = run_pipeline(curves, cfg, cfg.seed);
    write_single_run(dir, cfg, art, truth ? &*truth : nullptr);
    return 0;
  } catch (const numeric_error& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"funoclust: model-based functional clustering with iterative outlier trimming"};
  RunConfig cfg;

  auto* input = app.add_option("--input", cfg.input_path, "Curve CSV (row 1 = time grid)");
  auto* simulate =
      app.add_flag("--simulate", cfg.simulate, "Generate the two-family benchmark dataset");
  input->excludes(simulate);
  app.add_option("--knots", cfg.n_interior_knots, "Interior knot count")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--clusters", cfg.n_clusters, "Mixture component count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--max-outliers", cfg.max_outliers, "Trimming cap F")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--bins", cfg.n_bins, "KL histogram bins")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--replicates", cfg.replicates, "Benchmark replicate count (with --simulate)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--impute", cfg.impute_missing, "Impute missing cells with column means");
  app.add_option("--out-dir", cfg.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!cfg.simulate && cfg.input_path.empty()) {
    std::cerr << "error: provide --input FILE or --simulate\n";
    return 1;
  }
  return run(cfg);
}

}  // namespace funoclust
