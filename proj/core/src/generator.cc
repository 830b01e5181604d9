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

// Synthetic stage-1 plant: a tank level (LIT101) filled through a motorized
// valve (MV101) and drained by a pump (P101) on a fixed duty cycle, an inflow
// meter (FIT101), and a slow chemistry analyzer (AIT402).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "twinguard/telemetry.h"

namespace twinguard {
namespace {

constexpr int64_t kMinRows = 1400;

// Pump schedule: on (2) for the first kPumpOn seconds of every kPumpPeriod.
constexpr int kPumpPeriod = 100;
constexpr int kPumpOn = 20;

constexpr double kLevelBase = 0.5;
constexpr double kLevelSwing = 0.1;
constexpr double kLevelPeriod = 600.0;
constexpr double kLevelFillRate = 0.0012;
constexpr double kLevelNoise = 0.01;
constexpr double kLevelQuantum = 0.001;

constexpr double kFlowBase = 0.5;
constexpr double kFlowPumpStep = 0.2;
constexpr double kFlowNoise = 0.004;
constexpr double kFlowQuantum = 0.0002;

constexpr double kAnalyzerBase = 0.3;
constexpr double kAnalyzerSwing = 0.02;
constexpr double kAnalyzerPeriod = 900.0;
constexpr double kAnalyzerNoise = 0.005;
constexpr double kAnalyzerQuantum = 2.0 / 600.0;  // 2 analyzer units.

constexpr double kTransientRate = 0.02;
constexpr int kTransientMinLen = 3;
constexpr int kTransientMaxLen = 8;
constexpr double kTransientMinAmp = 0.03;
constexpr double kTransientMaxAmp = 0.12;

constexpr double kSpoofStep = 0.6;
constexpr double kSpoofRamp = 0.01;
constexpr double kValveClosedFlow = 0.05;
constexpr double kDriftRate = 0.022;

// std::normal_distribution is implementation-defined; this keeps datasets
// identical across standard libraries for a given seed.
class PortableRng {
 public:
  explicit PortableRng(uint64_t seed) : engine_(seed) {}

  double Uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  int UniformInt(int lo, int hi) {  // [lo, hi]
    const auto span = static_cast<uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  double Normal(double mean, double sigma) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + sigma * r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

bool PumpOn(int64_t t) { return (t % kPumpPeriod) < kPumpOn; }

// Zero-mean fill/drain sawtooth in phase with the pump cycle: the level rises
// while the pump is off and falls four times as fast while it runs.
double LevelCycle(int64_t t) {
  constexpr double fall =
      kLevelFillRate * (kPumpPeriod - kPumpOn) / static_cast<double>(kPumpOn);
  const auto phase = static_cast<int>(t % kPumpPeriod);
  // Level after each sample of the cycle, starting from the post-fill peak.
  auto raw = [&](int p) {
    return p < kPumpOn ? -fall * (p + 1)
                       : -fall * kPumpOn + kLevelFillRate * (p - kPumpOn + 1);
  };
  double mean = 0.0;
  for (int p = 0; p < kPumpPeriod; ++p) mean += raw(p);
  mean /= kPumpPeriod;
  return raw(phase) - mean;
}

double Quantize(double x, double q) { return std::round(x / q) * q; }

}  // namespace

double TagScale(Tag tag) {
  switch (tag) {
    case Tag::kLIT101: return 1000.0;  // mm
    case Tag::kFIT101: return 5.0;     // m3/h
    case Tag::kAIT402: return 600.0;   // analyzer units
    default: return 1.0;
  }
}

std::vector<TelemetryRecord> GenerateDataset(const GeneratorOptions& options) {
  const int64_t n = std::max(options.rows, kMinRows);
  PortableRng rng(options.seed);

  std::vector<double> lit(n), fit(n), ait(n);
  std::vector<int> mv(n, kActuatorOpen), p101(n);
  for (int64_t t = 0; t < n; ++t) {
    p101[t] = PumpOn(t) ? kActuatorOpen : kActuatorClosed;
  }
  for (int64_t t = 0; t < n; ++t) {
    lit[t] = kLevelBase +
             kLevelSwing * std::sin(2.0 * std::numbers::pi * t / kLevelPeriod) +
             LevelCycle(t) + rng.Normal(0.0, kLevelNoise);
  }
  for (int64_t t = 0; t < n; ++t) {
    fit[t] = kFlowBase + (PumpOn(t) ? kFlowPumpStep : 0.0) +
             rng.Normal(0.0, kFlowNoise);
  }
  for (int64_t t = 0; t < n; ++t) {
    ait[t] = kAnalyzerBase +
             kAnalyzerSwing *
                 std::sin(2.0 * std::numbers::pi * t / kAnalyzerPeriod + 1.0) +
             rng.Normal(0.0, kAnalyzerNoise);
  }
  // Half-sine transients on the flow meter and analyzer only.
  for (int64_t t = 0; t < n; ++t) {
    if (rng.Uniform() >= kTransientRate) continue;
    const int len = rng.UniformInt(kTransientMinLen, kTransientMaxLen);
    const double sign = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    const double amp = sign * rng.Uniform(kTransientMinAmp, kTransientMaxAmp);
    std::vector<double>& target = rng.Uniform() < 0.5 ? fit : ait;
    for (int k = 0; k < len && t + k < n; ++k) {
      target[t + k] += amp * std::sin(std::numbers::pi * (k + 1) / (len + 1));
    }
  }
  for (double& x : lit) x = Quantize(x, kLevelQuantum);
  for (double& x : fit) x = Quantize(x, kFlowQuantum);
  for (double& x : ait) x = Quantize(x, kAnalyzerQuantum);

  std::vector<Scenario> labels(n, Scenario::kBenign);
  if (options.inject_attacks) {
    for (const GroundTruthInterval& iv : DefaultScenarioIntervals()) {
      for (int64_t t = iv.start; t <= iv.end; ++t) {
        labels[t] = iv.scenario;
        switch (iv.scenario) {
          case Scenario::kSpoofing:
            lit[t] += kSpoofStep + kSpoofRamp * (t - iv.start);
            break;
          case Scenario::kValveForcing:
            mv[t] = (t - iv.start) % 2 == 0 ? kActuatorClosed : kActuatorOpen;
            if (mv[t] == kActuatorClosed) fit[t] = kValveClosedFlow;
            break;
          case Scenario::kFreezeDos:
            lit[t] = lit[iv.start - 1];
            fit[t] = fit[iv.start - 1];
            ait[t] = ait[iv.start - 1];
            break;
          case Scenario::kBiasDrift:
            lit[t] += kDriftRate * (t - iv.start + 1);
            break;
          case Scenario::kBenign:
            break;
        }
      }
    }
  }

  std::vector<TelemetryRecord> records(n);
  for (int64_t t = 0; t < n; ++t) {
    TelemetryRecord& r = records[t];
    r.index = t;
    r.sensors = {lit[t], fit[t], ait[t]};
    r.actuators = {mv[t], p101[t]};
    r.label = labels[t];
  }
  return records;
}

std::vector<TelemetryRecord> GenerateDataset(uint64_t seed, int64_t rows) {
  return GenerateDataset(GeneratorOptions{seed, rows, true});
}

}  // namespace twinguard
