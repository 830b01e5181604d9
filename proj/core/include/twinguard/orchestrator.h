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

// The detection loop: pull window -> features -> rules -> (on abstention)
// LLM gate -> fuse -> smooth -> trace, one index at a time.

#ifndef TWINGUARD_ORCHESTRATOR_H_
#define TWINGUARD_ORCHESTRATOR_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <string>

#include "twinguard/evaluator.h"
#include "twinguard/features.h"
#include "twinguard/fusion.h"
#include "twinguard/heuristics.h"
#include "twinguard/iforest.h"
#include "twinguard/llm_backend.h"
#include "twinguard/llm_gate.h"
#include "twinguard/replay_service.h"

namespace twinguard {

struct RunConfig {
  int64_t start = 29;
  int64_t end = 1399;
  int window_length = 30;
  HeuristicConfig heuristics;
  FeatureConfig features;
  SmoothingConfig smoothing;
  LlmBackendConfig llm;
  // Past decisions quoted in each prompt.
  int recent_context = 5;

  // Throws std::invalid_argument unless window_length >= 2,
  // start >= window_length - 1 and start <= end; validates the nested configs.
  void Validate() const;
};

struct WindowOutcome {
  FeatureVector features;
  HeuristicVerdict verdict;
  GateOutcome gate;
  Decision decision;
};

// Per-run state: history counters, level variance and the smoother.
class Detector {
 public:
  Detector(const RunConfig& config, LlmBackend& backend);

  // Windows must arrive in increasing index order.
  WindowOutcome Step(const Window& window);

  int64_t windows() const { return history_len_; }
  int64_t llm_queries() const { return llm_queries_; }

 private:
  RunConfig config_;
  LlmBackend& backend_;
  HistoryTracker level_;
  std::optional<int64_t> last_observed_;
  int64_t history_len_ = 0;
  int64_t llm_queries_ = 0;
  TemporalSmoother smoother_;
  std::deque<RecentVerdict> recent_;
};

// One JSONL trace row with the decision, features digest, evidence and LLM
// outcome.
std::string TraceLine(const WindowOutcome& outcome);

struct RunSummary {
  EvalReport report;
  int64_t windows = 0;
  int64_t heuristic_positives = 0;
  int64_t abstentions = 0;
  int64_t llm_queries = 0;
  int64_t llm_accepted = 0;
  int64_t llm_positives = 0;
  int64_t llm_schema_violations = 0;
  int64_t llm_implausible = 0;
  int64_t llm_unavailable = 0;
  double elapsed_s = 0.0;
};

// Runs indices start..end. Each trace line is flushed as it is written.
// ReplayError propagates (the run aborts); LLM failures never do.
RunSummary RunDetector(const RunConfig& config, ReplaySource& replay,
                       LlmBackend& backend, std::ostream* trace,
                       std::span<const GroundTruthInterval> truth,
                       const EvalConfig& eval = {});

// Isolation Forest baseline over the same index range; alarms are raw
// window predictions (no smoothing).
RunSummary RunIForestBaseline(const IForestDetector& detector,
                              ReplaySource& replay, int64_t start, int64_t end,
                              std::ostream* trace,
                              std::span<const GroundTruthInterval> truth);

}  // namespace twinguard

#endif  // TWINGUARD_ORCHESTRATOR_H_
