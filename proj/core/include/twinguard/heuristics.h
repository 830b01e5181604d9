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

// Deterministic rule detector for the four process-level attack signatures.
//
// Comparators are strict except for the history and toggle gates, which are
// inclusive. History gates count processed windows and never reset.

#ifndef TWINGUARD_HEURISTICS_H_
#define TWINGUARD_HEURISTICS_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twinguard/features.h"
#include "twinguard/telemetry.h"

namespace twinguard {

struct HeuristicConfig {
  int64_t spoof_min_history = 40;
  int64_t valve_min_history = 40;
  int valve_min_toggles = 1;
  double valve_osc_range = 0.03;
  int64_t drift_min_history = 70;
  double drift_slope_floor = 0.004;
  double drift_slope_std_mult = 1.2;
  double drift_std_min = 0.005;
  double drift_std_max = 0.06;
  double drift_flatness_max = 0.90;
  int64_t dos_min_history = 80;
  double dos_freeze_min = 0.95;
  double dos_std_max = 0.001;
  double spoof_slope_min = 0.003;
  double spoof_consistency_tol = 0.35;
  double benign_var_floor = 1e-4;

  double spoof_confidence = 0.85;
  double valve_confidence = 0.85;
  double drift_confidence = 0.97;
  double dos_confidence = 0.97;

  // Throws std::invalid_argument on a non-positive threshold, an inverted
  // drift band, a consistency tolerance outside [0,1) or a confidence
  // outside (0,1].
  void Validate() const;

  // Sets one field by its snake_case name. Returns false for unknown keys;
  // throws std::invalid_argument for unparsable values.
  bool Set(std::string_view key, std::string_view value);

  // `key = value` lines; `#` starts a comment. Unknown keys are errors.
  static HeuristicConfig FromKeyValueText(std::string_view text);
  static HeuristicConfig FromKeyValueFile(const std::string& path);
  std::string ToKeyValueText() const;

  static const std::vector<std::string_view>& Keys();
};

enum class AttackKind { kSpoofing, kValveForcing, kBiasDrift, kFreezeDos, kAbstain };

std::string_view AttackKindName(AttackKind kind);
std::optional<AttackKind> ParseAttackKind(std::string_view name);
// kAbstain maps to nullopt.
std::optional<Scenario> ScenarioOf(AttackKind kind);

struct Evidence {
  std::string feature;
  double observed = 0.0;
  double threshold = 0.0;
  std::string comparator;  // One of ">", ">=", "<", "<=".

  bool operator==(const Evidence&) const = default;
};

struct HeuristicVerdict {
  AttackKind kind = AttackKind::kAbstain;
  double confidence = 0.0;
  std::vector<Evidence> evidence;

  bool fired() const { return kind != AttackKind::kAbstain; }
  static HeuristicVerdict Abstain() { return {}; }

  bool operator==(const HeuristicVerdict&) const = default;
};

std::optional<HeuristicVerdict> DetectSpoofing(const FeatureVector& fv,
                                               const HeuristicConfig& cfg);
std::optional<HeuristicVerdict> DetectValveForcing(const FeatureVector& fv,
                                                   const HeuristicConfig& cfg);
std::optional<HeuristicVerdict> DetectBiasDrift(const FeatureVector& fv,
                                                const HeuristicConfig& cfg);
std::optional<HeuristicVerdict> DetectFreezeDos(const FeatureVector& fv,
                                                const HeuristicConfig& cfg);

// Highest-confidence firing rule; ties go to freeze_dos, then bias_drift,
// then valve_forcing, then spoofing.
HeuristicVerdict EvaluateHeuristics(const FeatureVector& fv,
                                    const HeuristicConfig& cfg);

}  // namespace twinguard

#endif  // TWINGUARD_HEURISTICS_H_
