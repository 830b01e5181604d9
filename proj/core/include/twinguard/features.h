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

// Per-window behavioral descriptors.

#ifndef TWINGUARD_FEATURES_H_
#define TWINGUARD_FEATURES_H_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "twinguard/telemetry.h"

namespace twinguard {

class FeatureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Least-squares slope against sample positions 0..L-1, in units per sample.
// Requires at least 2 samples.
double Slope(std::span<const double> series);

// Population standard deviation (divides by L). Requires at least 2 samples.
double RollingStd(std::span<const double> series);

// Population standard deviation of the least-squares residuals, i.e. the
// spread left once the linear trend is removed.
double DetrendedStd(std::span<const double> series);

// max - min. Requires at least 1 sample.
double AmplitudeRange(std::span<const double> series);

// Last sample minus first sample. Requires at least 1 sample.
double NetChange(std::span<const double> series);

// Fraction of the L-1 consecutive deltas with |delta| < epsilon_flat.
double FlatnessRatio(std::span<const double> series, double epsilon_flat);

inline constexpr double kFreezeTolerance = 1e-9;

// Fraction of the L-1 consecutive deltas with |delta| <= tolerance.
double FreezeRatio(std::span<const double> series,
                   double tolerance = kFreezeTolerance);

// Consecutive pairs with differing states. Requires at least 1 sample.
int ToggleCount(std::span<const int> states);

// Fraction of samples in the open/on state.
double ActiveFraction(std::span<const int> states);

struct SensorFeatures {
  double slope = 0.0;
  double std = 0.0;
  double detrended_std = 0.0;
  double range = 0.0;
  double net_change = 0.0;  // Last sample minus first sample.
  double flatness_ratio = 0.0;
  double freeze_ratio = 0.0;

  bool operator==(const SensorFeatures&) const = default;
};

struct ActuatorFeatures {
  int toggle_count = 0;
  double active_fraction = 0.0;

  bool operator==(const ActuatorFeatures&) const = default;
};

struct FeatureConfig {
  double epsilon_flat = 1e-3;
  double freeze_tolerance = kFreezeTolerance;
};

struct FeatureVector {
  std::array<SensorFeatures, kNumSensors> sensors{};
  std::array<ActuatorFeatures, kNumActuators> actuators{};
  int64_t window_end_index = 0;
  int window_length = 0;
  // Windows processed so far in the run, including this one.
  int64_t history_len = 0;
  // Variance of every LIT101 sample observed so far in the run.
  double history_variance = 0.0;

  const SensorFeatures& sensor(Tag tag) const { return sensors[SlotOf(tag)]; }
  SensorFeatures& sensor(Tag tag) { return sensors[SlotOf(tag)]; }
  const ActuatorFeatures& actuator(Tag tag) const {
    return actuators[SlotOf(tag)];
  }
  ActuatorFeatures& actuator(Tag tag) { return actuators[SlotOf(tag)]; }

  bool operator==(const FeatureVector&) const = default;
};

// Pure function of its inputs. Throws FeatureError for windows shorter than
// 2 samples.
FeatureVector ExtractFeatures(const Window& window, int64_t history_len,
                              double history_variance,
                              const FeatureConfig& config = {});

// Running mean/variance over a stream of samples (Welford).
class HistoryTracker {
 public:
  void Observe(double x);
  int64_t count() const { return count_; }
  double mean() const { return mean_; }
  // Population variance; 0 until two samples have been seen.
  double variance() const;

 private:
  int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace twinguard

#endif  // TWINGUARD_FEATURES_H_
