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

#include "twinguard/fusion.h"

#include <algorithm>
#include <stdexcept>

namespace twinguard {
namespace {

std::optional<Scenario> ScenarioForTactic(const ThreatReport& report) {
  switch (report.tactic) {
    case Tactic::kInhibitResponse: return Scenario::kFreezeDos;
    case Tactic::kImpairProcessControl: return Scenario::kValveForcing;
    case Tactic::kManipulationOfView: return Scenario::kSpoofing;
    case Tactic::kNone: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string_view DecisionSourceName(DecisionSource source) {
  switch (source) {
    case DecisionSource::kNone: return "none";
    case DecisionSource::kHeuristic: return "heuristic";
    case DecisionSource::kLlm: return "llm";
    case DecisionSource::kBaseline: return "baseline";
  }
  return "?";
}

std::optional<DecisionSource> ParseDecisionSource(std::string_view name) {
  for (const DecisionSource s : {DecisionSource::kNone,
                                 DecisionSource::kHeuristic,
                                 DecisionSource::kLlm,
                                 DecisionSource::kBaseline}) {
    if (DecisionSourceName(s) == name) return s;
  }
  return std::nullopt;
}

Decision Fuse(int64_t index, const HeuristicVerdict& verdict,
              const std::optional<ThreatReport>& accepted_report) {
  Decision d;
  d.index = index;
  if (verdict.fired()) {
    d.raw_positive = true;
    d.source = DecisionSource::kHeuristic;
    d.confidence = verdict.confidence;
    d.scenario_guess = ScenarioOf(verdict.kind);
    return d;
  }
  if (accepted_report && accepted_report->tactic != Tactic::kNone &&
      accepted_report->confidence >= kLlmPositiveConfidence) {
    d.raw_positive = true;
    d.source = DecisionSource::kLlm;
    d.confidence = accepted_report->confidence;
    d.scenario_guess = ScenarioForTactic(*accepted_report);
  }
  return d;
}

std::string_view SmoothingPolicyName(SmoothingPolicy policy) {
  return policy == SmoothingPolicy::kMajority ? "majority" : "hysteresis";
}

std::optional<SmoothingPolicy> ParseSmoothingPolicy(std::string_view name) {
  if (name == "hysteresis") return SmoothingPolicy::kHysteresis;
  if (name == "majority") return SmoothingPolicy::kMajority;
  return std::nullopt;
}

void SmoothingConfig::Validate() const {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  if (on_threshold < 1 || on_threshold > window) {
    throw std::invalid_argument("on_threshold must lie in [1, window]");
  }
  if (off_threshold < 1) {
    throw std::invalid_argument("off_threshold must be >= 1");
  }
  if (!(bypass_confidence > 0.0 && bypass_confidence <= 1.0)) {
    throw std::invalid_argument("bypass_confidence must lie in (0, 1]");
  }
}

bool Smooth(std::span<const Decision> history, const SmoothingConfig& cfg) {
  TemporalSmoother smoother(cfg);
  bool alarm = false;
  for (const Decision& d : history) alarm = smoother.Push(d);
  return alarm;
}

TemporalSmoother::TemporalSmoother(SmoothingConfig cfg) : cfg_(cfg) {
  cfg_.Validate();
}

bool TemporalSmoother::Push(bool raw_positive, double confidence) {
  if (cfg_.policy == SmoothingPolicy::kMajority) {
    recent_.push_back(raw_positive);
    if (static_cast<int>(recent_.size()) > cfg_.window) recent_.pop_front();
    const auto positives = std::count(recent_.begin(), recent_.end(), true);
    alarm_ = 2 * positives > cfg_.window;
    return alarm_;
  }

  positive_run_ = raw_positive ? positive_run_ + 1 : 0;
  negative_run_ = raw_positive ? 0 : negative_run_ + 1;
  if (!alarm_) {
    const bool bypass = raw_positive && confidence >= cfg_.bypass_confidence;
    if (bypass || positive_run_ >= cfg_.on_threshold) alarm_ = true;
  } else if (negative_run_ >= cfg_.off_threshold) {
    alarm_ = false;
  }
  return alarm_;
}

}  // namespace twinguard
