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

// Isolation Forest baseline over per-window feature vectors.
//
// Score s(x) = 2^(-E[h(x)] / c(psi)). Paths that end in an unexpanded leaf
// holding n training samples are extended by c(n).

#ifndef TWINGUARD_IFOREST_H_
#define TWINGUARD_IFOREST_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twinguard/features.h"
#include "twinguard/telemetry.h"

namespace twinguard {

class IForestError : public std::runtime_error {
 public:
  enum class Code { kEmptyTrainingSet, kNotTrained, kDimensionMismatch, kFormat };

  IForestError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline constexpr double kEulerGamma = 0.5772156649;

// Harmonic number approximation H(i) = ln(i) + gamma.
double HarmonicApprox(double i);

// Average unsuccessful-search path length of a binary search tree on n
// points: 2H(n-1) - 2(n-1)/n for n > 2, 1 for n = 2, 0 below.
double AveragePathLength(int64_t n);

// 2^(-mean_path / c(psi)).
double AnomalyScore(double mean_path, int64_t psi);

// Window features used by the baseline: slope, std, range and freeze ratio
// for each sensor, then the toggle count of each actuator.
inline constexpr int kIForestFeatureCount = 4 * kNumSensors + kNumActuators;
std::vector<double> IForestFeatures(const FeatureVector& fv);
std::vector<std::string> IForestFeatureNames();

struct IForestConfig {
  int n_trees = 100;
  int subsample = 256;  // psi; clamped to the training set size.
  uint64_t seed = 0;
};

class IsolationForest {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf.
    double split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;  // Training samples that reached the node.
    int depth = 0;

    bool operator==(const Node&) const = default;
  };
  using Tree = std::vector<Node>;  // Root at index 0.

  IsolationForest() = default;

  // Throws IForestError(kEmptyTrainingSet) on empty input and
  // kDimensionMismatch on ragged rows.
  static IsolationForest Fit(std::span<const std::vector<double>> rows,
                             const IForestConfig& config);

  bool trained() const { return !trees_.empty(); }
  int subsample() const { return psi_; }
  int dimensions() const { return dims_; }
  int max_depth() const { return max_depth_; }
  const std::vector<Tree>& trees() const { return trees_; }
  // Per-feature [min, max] over the training rows.
  const std::vector<std::pair<double, double>>& feature_ranges() const {
    return ranges_;
  }

  // E[h(x)] over the trees.
  double MeanPathLength(std::span<const double> x) const;
  // In (0, 1]. Throws IForestError(kNotTrained) before Fit.
  double Score(std::span<const double> x) const;

  std::string ToJson() const;
  static IsolationForest FromJson(std::string_view text);

  bool operator==(const IsolationForest&) const = default;

 private:
  std::vector<Tree> trees_;
  std::vector<std::pair<double, double>> ranges_;
  int psi_ = 0;
  int dims_ = 0;
  int max_depth_ = 0;
};

// Nearest-rank quantile (q in [0,1]): the smallest score with at least a
// fraction q of the scores at or below it.
double QuantileThreshold(std::vector<double> scores, double q);

inline constexpr double kDefaultIForestThreshold = 0.62;
inline constexpr int kIForestWindow = 15;

// A trained model together with its alarm threshold.
struct IForestDetector {
  IsolationForest model;
  double threshold = kDefaultIForestThreshold;
  int window_length = kIForestWindow;
  FeatureConfig features;

  // Alarms iff score > threshold. The window may be of any length >= 2.
  bool PredictWindow(const Window& window) const;
  double ScoreWindow(const Window& window) const;

  // Model plus threshold and window length in one document.
  std::string ToJson() const;
  static IForestDetector FromJson(std::string_view text);
  void Save(const std::filesystem::path& path) const;
  static IForestDetector Load(const std::filesystem::path& path);
};

struct IForestTrainingOptions {
  int64_t first_end = kIForestWindow - 1;
  int64_t last_end = 999;
  double quantile = 0.99;
  IForestConfig forest;
};

// Trains on trailing windows ending at first_end..last_end of `records` and
// calibrates the threshold at the given quantile of the training scores.
IForestDetector TrainIForestDetector(std::span<const TelemetryRecord> records,
                                     const IForestTrainingOptions& options,
                                     int window_length = kIForestWindow);

}  // namespace twinguard

#endif  // TWINGUARD_IFOREST_H_
