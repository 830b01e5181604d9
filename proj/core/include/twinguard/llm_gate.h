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

// Escalation path for windows the rules abstain on: prompt composition,
// strict output schema, and the physical plausibility filter.
//
// Nothing rejected here can raise an alarm. Schema violations, implausible
// reports and an unreachable backend all collapse to abstention.

#ifndef TWINGUARD_LLM_GATE_H_
#define TWINGUARD_LLM_GATE_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "twinguard/features.h"
#include "twinguard/heuristics.h"
#include "twinguard/telemetry.h"

namespace twinguard {

class LlmBackend;

enum class Tactic {
  kImpairProcessControl,
  kInhibitResponse,
  kManipulationOfView,
  kNone,
};

std::string_view TacticName(Tactic tactic);
std::optional<Tactic> ParseTactic(std::string_view name);

struct ThreatReport {
  Tactic tactic = Tactic::kNone;
  std::string technique;
  std::vector<std::string> attack_paths;  // Rank 1 first.
  std::vector<std::string> mitigations;
  double confidence = 0.0;

  // Compact JSON with the five schema fields in a fixed order.
  std::string ToJson() const;

  bool operator==(const ThreatReport&) const = default;
};

// The exact field list every report must carry, in prompt order.
inline constexpr std::string_view kReportFields[] = {
    "tactic", "technique", "attack_paths", "mitigations", "confidence"};

// What the orchestrator remembers about recent windows for prompt context.
struct RecentVerdict {
  int64_t index = 0;
  std::string verdict;  // Attack kind name, "abstain", or an LLM tactic.
  bool smoothed = false;
};

// Deterministic: identical inputs give byte-identical prompts. The prompt
// embeds a `FEATURES_JSON:` line that machine readers may parse.
std::string ComposePrompt(const Window& window, const FeatureVector& fv,
                          std::span<const RecentVerdict> recent);

struct SchemaViolation {
  std::string reason;
};

// Accepts exactly one JSON object, optionally wrapped in prose or a code
// fence. Missing or unknown fields, wrong types, an out-of-vocabulary tactic,
// confidence outside [0,1], or attack_paths inconsistent with the tactic are
// all violations.
std::variant<ThreatReport, SchemaViolation> ValidateSchema(std::string_view raw);

struct PlausibilityRejection {
  std::string reason;
};

// Rejects reports whose hypothesized paths contradict the window:
//   valve manipulation with no MV101 toggles;
//   inflow spoofing with P101 and MV101 both inactive all window;
//   sensor freeze with every freeze_ratio below 0.8;
//   drift with |LIT101 slope| <= 1e-6.
std::variant<ThreatReport, PlausibilityRejection> PlausibilityFilter(
    const ThreatReport& report, const FeatureVector& fv);

enum class GateStatus {
  kNotQueried,
  kAccepted,
  kSchemaViolation,
  kImplausible,
  kUnavailable,
};

std::string_view GateStatusName(GateStatus status);

struct GateOutcome {
  GateStatus status = GateStatus::kNotQueried;
  std::optional<ThreatReport> report;  // Set only when accepted.
  std::string detail;                  // Rejection or failure reason.
};

// Query, validate and filter in one step. Backend failures never throw.
GateOutcome RunGate(LlmBackend& backend, const Window& window,
                    const FeatureVector& fv,
                    std::span<const RecentVerdict> recent);

}  // namespace twinguard

#endif  // TWINGUARD_LLM_GATE_H_
