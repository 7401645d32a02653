#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "funoclust/basis.hpp"
#include "funoclust/cli.hpp"
#include "funoclust/csv.hpp"

using namespace funoclust;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("funoclust_test_" + name);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  out << body;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small synthetic dataset: smooth curves on a 16-point grid.
std::string small_curve_csv(int n_curves, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::string body;
  for (int c = 0; c < 16; ++c) body += (c ? "," : "") + format_number(c / 15.0);
  body += "\n";
  for (int i = 0; i < n_curves; ++i) {
    const double a = 1.0 + 0.1 * gauss(rng);
    for (int c = 0; c < 16; ++c) {
      const double t = c / 15.0;
      body += (c ? "," : "") + format_number(a * std::sin(3.0 * t) + 0.05 * gauss(rng));
    }
    body += "\n";
  }
  return body;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"funoclust"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("ingest imputes a blank cell with the column mean") {
  TempDir dir("ingest_impute");
  write_file(dir.file("c.csv"),
             "0,1,2\n"
             "1.0,2.0,3.0\n"
             "2.0,,5.0\n"
             "3.0,6.0,7.0\n");
  CurveSet curves = ingest(dir.file("c.csv"), true);
  REQUIRE(curves.n_curves() == 3);
  REQUIRE(curves.n_points() == 3);
  CHECK(curves.values(1, 1) == doctest::Approx(4.0));  // mean of 2 and 6

  CHECK_THROWS_AS(ingest(dir.file("c.csv"), false), std::invalid_argument);
}

TEST_CASE("ingest rejects malformed files") {
  TempDir dir("ingest_bad");
  write_file(dir.file("ragged.csv"), "0,1,2\n1,2,3\n1,2\n");
  CHECK_THROWS_WITH_AS(ingest(dir.file("ragged.csv"), false),
                       doctest::Contains("row 3"), std::invalid_argument);

  write_file(dir.file("alpha.csv"), "0,1\n1,x\n");
  CHECK_THROWS_AS(ingest(dir.file("alpha.csv"), false), std::invalid_argument);

  write_file(dir.file("allmiss.csv"), "0,1\n1,\n2,\n");
  CHECK_THROWS_WITH_AS(ingest(dir.file("allmiss.csv"), true),
                       doctest::Contains("column 2"), std::invalid_argument);

  write_file(dir.file("badgrid.csv"), "0,0,1\n1,2,3\n");
  CHECK_THROWS_AS(ingest(dir.file("badgrid.csv"), false), std::invalid_argument);

  CHECK_THROWS_AS(ingest(dir.file("nofile.csv"), false), std::invalid_argument);
}

TEST_CASE("ingest handles a day-by-hour shaped matrix with one gap") {
  TempDir dir("ingest_days");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  std::string body;
  for (int h = 0; h < 24; ++h) body += (h ? "," : "") + std::to_string(h);
  body += "\n";
  for (int day = 0; day < 365; ++day) {
    for (int h = 0; h < 24; ++h) {
      body += h ? "," : "";
      if (day == 273 && h == 2) continue;  // one missing reading
      body += format_number(100.0 + 10.0 * gauss(rng));
    }
    body += "\n";
  }
  write_file(dir.file("days.csv"), body);
  CurveSet curves = ingest(dir.file("days.csv"), true);
  CHECK(curves.n_curves() == 365);
  CHECK(curves.n_points() == 24);

  double sum = 0.0;
  for (int day = 0; day < 365; ++day)
    if (day != 273) sum += curves.values(day, 2);
  CHECK(curves.values(273, 2) == doctest::Approx(sum / 364.0).epsilon(1e-12));
}

TEST_CASE("run writes consistent artifacts for a small input") {
  TempDir dir("run_small");
  write_file(dir.file("in.csv"), small_curve_csv(24, 11));

  RunConfig cfg;
  cfg.input_path = dir.file("in.csv");
  cfg.n_interior_knots = 2;
  cfg.n_clusters = 1;
  cfg.max_outliers = 3;
  cfg.seed = 5;
  cfg.out_dir = dir.file("out");
  REQUIRE(run(cfg) == 0);

  for (const char* name :
       {"labels.csv", "kl_trace.csv", "coefficients.csv", "fitted_curves.csv", "summary.json"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));

  // Outlier count in summary.json matches the OUTLIER labels.
  const std::string summary = read_file(cfg.out_dir + "/summary.json");
  const std::string labels = read_file(cfg.out_dir + "/labels.csv");
  int outlier_lines = 0;
  std::stringstream ss(labels);
  std::string line;
  while (std::getline(ss, line))
    if (line.find("OUTLIER") != std::string::npos) ++outlier_lines;
  const auto pos = summary.find("\"outlier_count\":");
  REQUIRE(pos != std::string::npos);
  const int reported = std::stoi(summary.substr(pos + 16));
  CHECK(reported == outlier_lines);

  // Reloading coefficients.csv and reconstructing reproduces fitted_curves.csv.
  Matrix coef_mat = read_matrix_csv(cfg.out_dir + "/coefficients.csv");
  Matrix fitted = read_matrix_csv(cfg.out_dir + "/fitted_curves.csv");
  TimeGrid grid;
  grid.points.resize(fitted.cols());
  for (int c = 0; c < fitted.cols(); ++c) grid.points[c] = fitted(0, c);
  KnotVector knots = make_knots(grid.lo(), grid.hi(), cfg.n_interior_knots);
  BasisMatrix basis = eval_basis(knots, grid);
  CoefficientSet coefs;
  coefs.coefs = coef_mat;
  CurveSet rebuilt = reconstruct(basis, coefs);
  CHECK((rebuilt.values - fitted.bottomRows(fitted.rows() - 1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reruns are byte-identical apart from the summary timestamp") {
  TempDir dir("run_detrm");
  write_file(dir.file("in.csv"), small_curve_csv(20, 13));

  RunConfig cfg;
  cfg.input_path = dir.file("in.csv");
  cfg.n_interior_knots = 2;
  cfg.n_clusters = 1;
  cfg.max_outliers = 2;
  cfg.seed = 21;
  cfg.out_dir = dir.file("out");

  const std::vector<std::string> names{"labels.csv", "kl_trace.csv", "coefficients.csv",
                                       "fitted_curves.csv", "summary.json"};
  REQUIRE(run(cfg) == 0);
  std::vector<std::string> first;
  for (const auto& name : names) first.push_back(read_file(cfg.out_dir + "/" + name));
  REQUIRE(run(cfg) == 0);

  auto strip_ts = [](std::string s) {
    const auto pos = s.find("\"timestamp\"");
    if (pos == std::string::npos) return s;
    const auto end = s.find('\n', pos);
    s.erase(pos, end - pos);
    return s;
  };
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string second = read_file(cfg.out_dir + "/" + names[i]);
    if (names[i] == "summary.json")
      CHECK(strip_ts(first[i]) == strip_ts(second));
    else
      CHECK(first[i] == second);
  }
}

TEST_CASE("G=1 with F=0 labels every curve into the single cluster") {
  TempDir dir("run_f0");
  write_file(dir.file("in.csv"), small_curve_csv(18, 17));
  RunConfig cfg;
  cfg.input_path = dir.file("in.csv");
  cfg.n_interior_knots = 2;
  cfg.n_clusters = 1;
  cfg.max_outliers = 0;
  cfg.out_dir = dir.file("out");
  REQUIRE(run(cfg) == 0);
  std::string labels = read_file(cfg.out_dir + "/labels.csv");
  CHECK(labels.find("OUTLIER") == std::string::npos);
}

TEST_CASE("simulate mode writes the dataset plus run artifacts") {
  TempDir dir("run_sim");
  RunConfig cfg;
  cfg.simulate = true;
  cfg.max_outliers = 3;  // keep the loop short; full scale lives in acceptance
  cfg.seed = 31;
  cfg.out_dir = dir.file("out");
  REQUIRE(run(cfg) == 0);

  for (const char* name : {"simulated_curves.csv", "truth_labels.csv", "labels.csv",
                           "kl_trace.csv", "summary.json"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));

  // Dataset round-trips through ingest: 515 curves on the 100-point grid.
  CurveSet curves = ingest(cfg.out_dir + "/simulated_curves.csv", false);
  CHECK(curves.n_curves() == 515);
  CHECK(curves.n_points() == 100);

  const std::string summary = read_file(cfg.out_dir + "/summary.json");
  CHECK(summary.find("\"ari_full\"") != std::string::npos);
  CHECK(summary.find("\"false_positive_rate\"") != std::string::npos);
}

TEST_CASE("benchmark mode aggregates replicates with mean and sd rows") {
  TempDir dir("run_bench");
  RunConfig cfg;
  cfg.simulate = true;
  cfg.replicates = 2;
  cfg.max_outliers = 3;
  cfg.seed = 33;
  cfg.out_dir = dir.file("out");
  REQUIRE(run(cfg) == 0);

  const std::string body = read_file(cfg.out_dir + "/benchmark.csv");
  std::stringstream ss(body);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);  // header, 2 replicates, mean, sd
  CHECK(lines[0] ==
        "replicate,seed,ari,fp_rate,fn_rate,predicted_outliers,ari_tkmeans");
  CHECK(lines[3].rfind("mean,", 0) == 0);
  CHECK(lines[4].rfind("sd,", 0) == 0);
}

TEST_CASE("cli exit codes: parse, config, and numeric errors") {
  TempDir dir("cli_codes");
  CHECK(run_cli({"--no-such-flag"}) == 1);
  CHECK(run_cli({}) == 1);  // neither --input nor --simulate
  CHECK(run_cli({"--input", dir.file("missing.csv"), "--out-dir", dir.file("o")}) == 1);
  CHECK(run_cli({"--help"}) == 0);

  // 8 grid points cannot support 12 basis functions: numeric degeneracy.
  std::string body = "0,1,2,3,4,5,6,7\n";
  for (int i = 0; i < 30; ++i) body += "1,2,3,4,5,6,7,8\n";
  write_file(dir.file("narrow.csv"), body);
  CHECK(run_cli({"--input", dir.file("narrow.csv"), "--knots", "8", "--clusters", "1",
                 "--max-outliers", "0", "--out-dir", dir.file("o2")}) == 2);
}

TEST_CASE("simulate flag conflicts with input") {
  TempDir dir("cli_conflict");
  write_file(dir.file("in.csv"), small_curve_csv(12, 19));
  CHECK(run_cli({"--input", dir.file("in.csv"), "--simulate"}) == 1);
}
