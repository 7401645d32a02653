// Shared oracle helpers for the test suites. Everything here is implemented
// independently of the library code paths it checks: the beta CDF goes
// through a continued fraction rather than density quadrature, covariances
// are two-pass textbook sums, and determinants use LU instead of Cholesky.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// ---- regularized incomplete beta I_x(a, b), Lentz continued fraction ----

inline double beta_cf(double a, double b, double x) {
  const double eps = 3e-14, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

// ---- sampling ----

inline double sample_beta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  return x / (x + y);
}

inline Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                  int n, std::mt19937_64& rng) {
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd out(n, mean.size());
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < mean.size(); ++k) z(k) = gauss(rng);
    out.row(i) = (mean + l * z).transpose();
  }
  return out;
}

// ---- Kolmogorov-Smirnov distance against a reference CDF ----

inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

// ---- composite Simpson quadrature ----

inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int n_intervals) {
  if (n_intervals % 2 != 0) ++n_intervals;
  const double h = (hi - lo) / n_intervals;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n_intervals; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// ---- exact Gaussian fit log-likelihood at the MLE (LU determinant path) ----

inline double gaussian_mle_loglik(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const Eigen::VectorXd mean = x.colwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd d = x.row(i).transpose() - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);
  const double log_det = std::log(Eigen::FullPivLU<Eigen::MatrixXd>(cov).determinant());
  return -0.5 * n * (p * kLog2Pi + log_det + p);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace testutil
