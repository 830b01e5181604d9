/*
 * Copyright 2026 The TwinGuard Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "twinguard/features.h"

#include <algorithm>
#include <cmath>

namespace twinguard {
namespace {

void RequireAtLeast(std::span<const double> series, size_t n,
                    const char* what) {
  if (series.size() < n) {
    throw FeatureError(std::string(what) + " needs at least " +
                       std::to_string(n) + " samples, got " +
                       std::to_string(series.size()));
  }
}

// Accumulates offsets from the first sample, so a constant series has an
// exact mean and zero spread.
double Mean(std::span<const double> series) {
  const double origin = series.front();
  double sum = 0.0;
  for (const double x : series) sum += x - origin;
  return origin + sum / static_cast<double>(series.size());
}

// Centered positions t - (L-1)/2 make the fit independent of the absolute
// window position and keep the sums well conditioned.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;  // Value at the window center.
};

LineFit FitLine(std::span<const double> series) {
  const auto n = static_cast<double>(series.size());
  const double center = (n - 1.0) / 2.0;
  const double mean = Mean(series);
  double sxy = 0.0;
  double sxx = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    const double dt = static_cast<double>(i) - center;
    sxy += dt * (series[i] - mean);
    sxx += dt * dt;
  }
  return {sxy / sxx, mean};
}

double DeltaFraction(std::span<const double> series, double bound,
                     bool inclusive) {
  size_t hits = 0;
  for (size_t i = 1; i < series.size(); ++i) {
    const double delta = std::abs(series[i] - series[i - 1]);
    if (inclusive ? delta <= bound : delta < bound) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(series.size() - 1);
}

}  // namespace

double Slope(std::span<const double> series) {
  RequireAtLeast(series, 2, "slope");
  return FitLine(series).slope;
}

double RollingStd(std::span<const double> series) {
  RequireAtLeast(series, 2, "std");
  const double mean = Mean(series);
  double ss = 0.0;
  for (const double x : series) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(series.size()));
}

double DetrendedStd(std::span<const double> series) {
  RequireAtLeast(series, 2, "detrended std");
  const LineFit fit = FitLine(series);
  const double center = (static_cast<double>(series.size()) - 1.0) / 2.0;
  double ss = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    const double r = series[i] - fit.intercept -
                     fit.slope * (static_cast<double>(i) - center);
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(series.size()));
}

double AmplitudeRange(std::span<const double> series) {
  RequireAtLeast(series, 1, "range");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return *hi - *lo;
}

double NetChange(std::span<const double> series) {
  RequireAtLeast(series, 1, "net change");
  return series.back() - series.front();
}

double FlatnessRatio(std::span<const double> series, double epsilon_flat) {
  RequireAtLeast(series, 2, "flatness ratio");
  if (!(epsilon_flat > 0.0)) {
    throw FeatureError("epsilon_flat must be positive");
  }
  return DeltaFraction(series, epsilon_flat, /*inclusive=*/false);
}

double FreezeRatio(std::span<const double> series, double tolerance) {
  RequireAtLeast(series, 2, "freeze ratio");
  return DeltaFraction(series, tolerance, /*inclusive=*/true);
}

int ToggleCount(std::span<const int> states) {
  if (states.empty()) throw FeatureError("toggle count needs at least 1 sample");
  int toggles = 0;
  for (size_t i = 1; i < states.size(); ++i) {
    if (states[i] != states[i - 1]) ++toggles;
  }
  return toggles;
}

double ActiveFraction(std::span<const int> states) {
  if (states.empty()) return 0.0;
  const auto on = std::count(states.begin(), states.end(), kActuatorOpen);
  return static_cast<double>(on) / static_cast<double>(states.size());
}

FeatureVector ExtractFeatures(const Window& window, int64_t history_len,
                              double history_variance,
                              const FeatureConfig& config) {
  FeatureVector fv;
  fv.window_end_index = window.end_index;
  fv.window_length = window.length;
  fv.history_len = history_len;
  fv.history_variance = history_variance;
  for (int k = 0; k < kNumSensors; ++k) {
    const std::span<const double> x = window.sensors[k];
    SensorFeatures& f = fv.sensors[k];
    f.slope = Slope(x);
    f.std = RollingStd(x);
    f.detrended_std = DetrendedStd(x);
    f.range = AmplitudeRange(x);
    f.net_change = NetChange(x);
    f.flatness_ratio = FlatnessRatio(x, config.epsilon_flat);
    f.freeze_ratio = FreezeRatio(x, config.freeze_tolerance);
  }
  for (int k = 0; k < kNumActuators; ++k) {
    fv.actuators[k].toggle_count = ToggleCount(window.actuators[k]);
    fv.actuators[k].active_fraction = ActiveFraction(window.actuators[k]);
  }
  return fv;
}

void HistoryTracker::Observe(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

double HistoryTracker::variance() const {
  return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_);
}

}  // namespace twinguard
