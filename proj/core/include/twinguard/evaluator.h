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

// Scores smoothed decisions against ground-truth attack intervals.
//
// TTD for an interval is the first smoothed alarm index inside [start, end]
// minus start. False positives are counted per window. A window is benign
// when its trailing span [i - L + 1, i] touches no attack sample; alarms on
// windows that still overlap an attack are spillover, and alarms that stay on
// for at most K windows past the last overlapping window are hysteresis
// release. Neither counts as a false positive, but both are reported.

#ifndef TWINGUARD_EVALUATOR_H_
#define TWINGUARD_EVALUATOR_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twinguard/fusion.h"
#include "twinguard/telemetry.h"

namespace twinguard {

struct ScenarioResult {
  Scenario scenario = Scenario::kBenign;
  int64_t start = 0;
  int64_t end = 0;
  bool detected = false;
  std::optional<int64_t> ttd;
  std::optional<int64_t> first_alarm_index;
  int64_t alarm_windows = 0;  // Smoothed alarms inside [start, end].

  bool operator==(const ScenarioResult&) const = default;
};

struct FpRegion {
  int64_t start = 0;
  int64_t end = 0;  // Inclusive.

  bool operator==(const FpRegion&) const = default;
};

struct EvalConfig {
  // Windows after an interval's end that still contain attack samples;
  // the window length minus one for trailing windows.
  int64_t spillover_windows = 29;
  // Extra windows of alarm release (the smoother's K).
  int64_t release_grace = 3;
};

struct EvalReport {
  std::vector<ScenarioResult> scenarios;
  int64_t fp_count = 0;
  std::vector<FpRegion> fp_regions;
  int64_t windows_evaluated = 0;
  std::optional<int64_t> first_index;
  std::optional<int64_t> last_index;
  int64_t spillover_alarms = 0;
  int64_t release_alarms = 0;
  // Alarms outside every interval when only the release allowance applies
  // (no window spillover).
  int64_t strict_fp_count = 0;

  std::string ToJson() const;
  static EvalReport FromJson(std::string_view text);
  // Plain-text detection and false-positive tables.
  std::string ToTable(std::string_view system_name = "Hybrid DT") const;

  bool operator==(const EvalReport&) const = default;
};

std::optional<int64_t> ComputeTtd(std::span<const Decision> decisions,
                                  const GroundTruthInterval& interval);

struct FalsePositiveSummary {
  int64_t count = 0;
  std::vector<FpRegion> regions;
  int64_t spillover_alarms = 0;
  int64_t release_alarms = 0;
  int64_t strict_count = 0;
};

// Decisions must be sorted by index.
FalsePositiveSummary CountFalsePositives(
    std::span<const Decision> decisions,
    std::span<const GroundTruthInterval> intervals, const EvalConfig& cfg = {});

EvalReport Evaluate(std::span<const Decision> decisions,
                    std::span<const GroundTruthInterval> intervals,
                    const EvalConfig& cfg = {});

// Folds decisions one at a time in O(#intervals + #regions) memory and
// produces the same report as Evaluate on the full sequence.
class StreamingEvaluator {
 public:
  StreamingEvaluator(std::vector<GroundTruthInterval> intervals,
                     EvalConfig cfg = {});

  // Indices must be strictly increasing.
  void Add(const Decision& d);
  EvalReport Finish() const;

 private:
  // Judges alarms against the intervals for one spillover allowance.
  struct Tracker {
    enum class Verdict { kQuiet, kAttack, kSpillover, kRelease, kFalse };
    int64_t spillover = 0;
    int64_t grace = 0;
    std::optional<int64_t> anchor;  // Last attack/spillover alarm of the run.
    std::optional<int64_t> prev_alarm_index;
    Verdict Judge(int64_t index, bool alarm,
                  std::span<const GroundTruthInterval> intervals);
  };

  std::vector<GroundTruthInterval> intervals_;
  EvalConfig cfg_;
  EvalReport report_;
  Tracker main_;
  Tracker strict_;
  std::optional<int64_t> last_index_;
};

// JSONL trace rows. Each line holds at least index, verdict, source,
// confidence, raw, smoothed and scenario_guess.
std::string DecisionToJsonLine(const Decision& d, std::string_view verdict);
Decision DecisionFromJsonLine(std::string_view line);
std::vector<Decision> ReadTrace(std::istream& in);
std::vector<Decision> ReadTraceFile(const std::filesystem::path& path);

}  // namespace twinguard

#endif  // TWINGUARD_EVALUATOR_H_
