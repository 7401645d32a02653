#pragma once

#include <cstdint>
#include <vector>

#include "funoclust/types.hpp"

namespace funoclust {

/// Per-curve parameter laws for one simulated curve family: amplitude,
/// horizontal shift, and vertical offset are drawn once per curve.
struct FamilyLaw {
  double amplitude_mean = 1.0;
  double amplitude_sd = 0.4;
  double hshift_mean = 0.0;
  double hshift_sd = 0.4;
  double voffset_mean = 0.0;
  double voffset_sd = 0.4;
};

/// Two-family benchmark generator configuration. Defaults reproduce the
/// standard setup: 250 curves per class on 100 equally spaced points over
/// [0, 2*pi], measurement noise sd 0.4, and 15 uniform-noise outlier curves.
struct SimConfig {
  int n_per_class = 250;
  int n_outliers = 15;
  int n_grid = 100;
  double t_lo = 0.0;
  double t_hi = 6.283185307179586;
  double noise_sd = 0.4;
  FamilyLaw sine_family{1.0, 0.4, 0.0, 0.4, 0.0, 0.4};  // amplitude * sin(t - shift) + offset
  FamilyLaw log_family{1.0, 0.4, 2.0, 0.4, -1.0, 0.4};  // amplitude * log(t + shift) + offset
  std::uint64_t seed = 1;
};

/// Curves plus ground-truth classes: 1 (sine family), 2 (log family), or
/// kOutlierLabel for the uniform-noise curves.
struct LabeledCurveSet {
  CurveSet curves;
  std::vector<int> labels;
};

/// Draws the class curves first, then outlier curves whose every entry is
/// uniform between the global minimum and maximum of the class curves.
LabeledCurveSet generate(const SimConfig& config);

}  // namespace funoclust
