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

// Raw alarm fusion and temporal smoothing.
//
// Hysteresis policy: the alarm switches on when the current raw decision is
// positive with confidence >= bypass_confidence, or when the last M raw
// decisions are all positive. Once on, it stays on until K consecutive raw
// negatives. The majority policy instead alarms whenever more than half of
// the last N raw decisions are positive.

#ifndef TWINGUARD_FUSION_H_
#define TWINGUARD_FUSION_H_

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>

#include "twinguard/heuristics.h"
#include "twinguard/llm_gate.h"
#include "twinguard/telemetry.h"

namespace twinguard {

// kBaseline marks alarms from the Isolation Forest baseline run.
enum class DecisionSource { kNone, kHeuristic, kLlm, kBaseline };

std::string_view DecisionSourceName(DecisionSource source);
std::optional<DecisionSource> ParseDecisionSource(std::string_view name);

struct Decision {
  int64_t index = 0;
  bool raw_positive = false;
  DecisionSource source = DecisionSource::kNone;
  std::optional<Scenario> scenario_guess;
  double confidence = 0.0;
  bool smoothed_positive = false;

  bool operator==(const Decision&) const = default;
};

// Minimum confidence for an accepted LLM report to count as positive.
inline constexpr double kLlmPositiveConfidence = 0.5;

// A fired heuristic always wins and the report is ignored. Otherwise the
// decision is positive iff the accepted report names a tactic other than
// none with confidence >= 0.5. smoothed_positive is left false.
Decision Fuse(int64_t index, const HeuristicVerdict& verdict,
              const std::optional<ThreatReport>& accepted_report);

enum class SmoothingPolicy { kHysteresis, kMajority };

std::string_view SmoothingPolicyName(SmoothingPolicy policy);
std::optional<SmoothingPolicy> ParseSmoothingPolicy(std::string_view name);

struct SmoothingConfig {
  SmoothingPolicy policy = SmoothingPolicy::kHysteresis;
  int window = 5;         // N
  int on_threshold = 2;   // M
  double bypass_confidence = 0.95;
  int off_threshold = 3;  // K

  // Throws std::invalid_argument unless 1 <= M <= N, K >= 1 and
  // bypass_confidence is in (0, 1].
  void Validate() const;
};

// Smoothed value for the last element of `history`, recomputed from the
// whole raw history. Only raw_positive and confidence are read.
bool Smooth(std::span<const Decision> history, const SmoothingConfig& cfg);

// Incremental form of Smooth with O(max(N, M)) state; Push returns the same
// value Smooth would for the history pushed so far.
class TemporalSmoother {
 public:
  explicit TemporalSmoother(SmoothingConfig cfg);

  bool Push(bool raw_positive, double confidence);
  bool Push(const Decision& d) { return Push(d.raw_positive, d.confidence); }

  bool alarm() const { return alarm_; }
  const SmoothingConfig& config() const { return cfg_; }

 private:
  SmoothingConfig cfg_;
  std::deque<bool> recent_;
  int positive_run_ = 0;
  int negative_run_ = 0;
  bool alarm_ = false;
};

}  // namespace twinguard

#endif  // TWINGUARD_FUSION_H_
