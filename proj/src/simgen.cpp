#include "funoclust/simgen.hpp"

#include <cmath>
#include <random>

#include "funoclust/basis.hpp"

namespace funoclust {

LabeledCurveSet generate(const SimConfig& config) {
  if (config.n_per_class < 1) throw std::invalid_argument("generate: n_per_class must be >= 1");
  if (config.n_outliers < 0) throw std::invalid_argument("generate: negative outlier count");
  if (!(config.noise_sd >= 0.0)) throw std::invalid_argument("generate: negative noise sd");

  const int n_good = 2 * config.n_per_class;
  const int n = n_good + config.n_outliers;
  const int j = config.n_grid;

  LabeledCurveSet out;
  out.curves.grid = uniform_grid(config.t_lo, config.t_hi, j);
  out.curves.values.resize(n, j);
  out.labels.resize(n);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss;
  auto draw = [&](double mean, double sd) { return mean + sd * gauss(rng); };

  const auto& t = out.curves.grid.points;
  int row = 0;
  for (int i = 0; i < config.n_per_class; ++i, ++row) {
    const auto& law = config.sine_family;
    const double a = draw(law.amplitude_mean, law.amplitude_sd);
    const double b = draw(law.hshift_mean, law.hshift_sd);
    const double c = draw(law.voffset_mean, law.voffset_sd);
    for (int r = 0; r < j; ++r)
      out.curves.values(row, r) = a * std::sin(t[r] - b) + c + draw(0.0, config.noise_sd);
    out.labels[row] = 1;
  }
  for (int i = 0; i < config.n_per_class; ++i, ++row) {
    const auto& law = config.log_family;
    const double a = draw(law.amplitude_mean, law.amplitude_sd);
    // log(t + b) must be defined across the grid; b <= -t_lo has ~Phi(-5)
    // probability under the default law and is redrawn.
    double b = draw(law.hshift_mean, law.hshift_sd);
    while (!(config.t_lo + b > 0.0)) b = draw(law.hshift_mean, law.hshift_sd);
    const double c = draw(law.voffset_mean, law.voffset_sd);
    for (int r = 0; r < j; ++r)
      out.curves.values(row, r) = a * std::log(t[r] + b) + c + draw(0.0, config.noise_sd);
    out.labels[row] = 2;
  }

  if (config.n_outliers > 0) {
    const double lo = out.curves.values.topRows(n_good).minCoeff();
    const double hi = out.curves.values.topRows(n_good).maxCoeff();
    std::uniform_real_distribution<double> unif(lo, hi);
    for (int i = 0; i < config.n_outliers; ++i, ++row) {
      for (int r = 0; r < j; ++r) out.curves.values(row, r) = unif(rng);
      out.labels[row] = kOutlierLabel;
    }
  }
  return out;
}

}  // namespace funoclust
