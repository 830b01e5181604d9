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

#include "twinguard/orchestrator.h"

#include <chrono>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;

json FeatureDigest(const FeatureVector& fv) {
  json digest = json::object();
  for (const Tag tag : kSensorTags) {
    const SensorFeatures& f = fv.sensor(tag);
    digest[std::string(TagName(tag))] = {{"slope", f.slope},
                                         {"std", f.std},
                                         {"range", f.range},
                                         {"flatness", f.flatness_ratio},
                                         {"freeze", f.freeze_ratio}};
  }
  for (const Tag tag : kActuatorTags) {
    const ActuatorFeatures& a = fv.actuator(tag);
    digest[std::string(TagName(tag))] = {{"toggles", a.toggle_count},
                                         {"active", a.active_fraction}};
  }
  digest["history_len"] = fv.history_len;
  return digest;
}

std::string VerdictLabel(const WindowOutcome& o) {
  if (o.verdict.fired()) return std::string(AttackKindName(o.verdict.kind));
  if (o.gate.report) return "llm:" + std::string(TacticName(o.gate.report->tactic));
  return "abstain";
}

void Write(std::ostream* trace, const std::string& line) {
  if (!trace) return;
  *trace << line << '\n';
  trace->flush();
  if (!*trace) throw std::runtime_error("trace write failed");
}

}  // namespace

void RunConfig::Validate() const {
  if (window_length < 2) throw std::invalid_argument("window length must be >= 2");
  if (start < window_length - 1) {
    throw std::invalid_argument("start must be >= window length - 1");
  }
  if (start > end) throw std::invalid_argument("start must not exceed end");
  if (recent_context < 0) throw std::invalid_argument("recent_context < 0");
  heuristics.Validate();
  smoothing.Validate();
  llm.Validate();
}

Detector::Detector(const RunConfig& config, LlmBackend& backend)
    : config_(config), backend_(backend), smoother_(config.smoothing) {}

WindowOutcome Detector::Step(const Window& window) {
  if (last_observed_ && window.end_index <= *last_observed_) {
    throw std::invalid_argument("windows must arrive in increasing order");
  }
  // Fold every LIT101 sample not seen before into the level variance.
  const std::span<const double> level = window.sensor(Tag::kLIT101);
  for (int k = 0; k < window.length; ++k) {
    const int64_t idx = window.start_index() + k;
    if (!last_observed_ || idx > *last_observed_) level_.Observe(level[k]);
  }
  last_observed_ = window.end_index;
  ++history_len_;

  WindowOutcome out;
  out.features = ExtractFeatures(window, history_len_, level_.variance(),
                                 config_.features);
  out.verdict = EvaluateHeuristics(out.features, config_.heuristics);
  if (!out.verdict.fired()) {
    ++llm_queries_;
    const std::vector<RecentVerdict> recent(recent_.begin(), recent_.end());
    out.gate = RunGate(backend_, window, out.features, recent);
  }
  out.decision = Fuse(window.end_index, out.verdict, out.gate.report);
  out.decision.smoothed_positive = smoother_.Push(out.decision);

  if (config_.recent_context > 0) {
    recent_.push_back({window.end_index, VerdictLabel(out),
                       out.decision.smoothed_positive});
    while (static_cast<int>(recent_.size()) > config_.recent_context) {
      recent_.pop_front();
    }
  }
  return out;
}

std::string TraceLine(const WindowOutcome& o) {
  const Decision& d = o.decision;
  json evidence = json::array();
  for (const Evidence& e : o.verdict.evidence) {
    evidence.push_back({{"feature", e.feature},
                        {"observed", e.observed},
                        {"threshold", e.threshold},
                        {"comparator", e.comparator}});
  }
  json llm = nullptr;
  if (o.gate.status != GateStatus::kNotQueried) {
    llm = {{"status", GateStatusName(o.gate.status)}};
    if (!o.gate.detail.empty()) llm["detail"] = o.gate.detail;
    llm["report"] =
        o.gate.report ? json::parse(o.gate.report->ToJson()) : json(nullptr);
  }
  const json line = {
      {"index", d.index},
      {"verdict", VerdictLabel(o)},
      {"source", DecisionSourceName(d.source)},
      {"confidence", d.confidence},
      {"raw", d.raw_positive},
      {"smoothed", d.smoothed_positive},
      {"scenario_guess", d.scenario_guess
                             ? json(ScenarioName(*d.scenario_guess))
                             : json(nullptr)},
      {"features", FeatureDigest(o.features)},
      {"evidence", evidence},
      {"llm", llm}};
  return line.dump();
}

RunSummary RunDetector(const RunConfig& config, ReplaySource& replay,
                       LlmBackend& backend, std::ostream* trace,
                       std::span<const GroundTruthInterval> truth,
                       const EvalConfig& eval) {
  config.Validate();
  const auto t0 = std::chrono::steady_clock::now();
  Detector detector(config, backend);
  StreamingEvaluator evaluator(
      std::vector<GroundTruthInterval>(truth.begin(), truth.end()), eval);
  RunSummary summary;
  for (int64_t i = config.start; i <= config.end; ++i) {
    const Window window = replay.Fetch(i, config.window_length);
    const WindowOutcome out = detector.Step(window);
    ++summary.windows;
    if (out.verdict.fired()) {
      ++summary.heuristic_positives;
    } else {
      ++summary.abstentions;
      ++summary.llm_queries;
      switch (out.gate.status) {
        case GateStatus::kAccepted: ++summary.llm_accepted; break;
        case GateStatus::kSchemaViolation: ++summary.llm_schema_violations; break;
        case GateStatus::kImplausible: ++summary.llm_implausible; break;
        case GateStatus::kUnavailable: ++summary.llm_unavailable; break;
        case GateStatus::kNotQueried: break;
      }
      if (out.decision.raw_positive) ++summary.llm_positives;
    }
    evaluator.Add(out.decision);
    Write(trace, TraceLine(out));
  }
  summary.report = evaluator.Finish();
  summary.elapsed_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return summary;
}

RunSummary RunIForestBaseline(const IForestDetector& detector,
                              ReplaySource& replay, int64_t start, int64_t end,
                              std::ostream* trace,
                              std::span<const GroundTruthInterval> truth) {
  if (start < detector.window_length - 1 || start > end) {
    throw std::invalid_argument("bad baseline index range");
  }
  const auto t0 = std::chrono::steady_clock::now();
  EvalConfig eval;
  eval.spillover_windows = detector.window_length - 1;
  eval.release_grace = 0;
  StreamingEvaluator evaluator(
      std::vector<GroundTruthInterval>(truth.begin(), truth.end()), eval);
  RunSummary summary;
  for (int64_t i = start; i <= end; ++i) {
    const Window window = replay.Fetch(i, detector.window_length);
    const double score = detector.ScoreWindow(window);
    Decision d;
    d.index = i;
    if (score > detector.threshold) {
      d.raw_positive = true;
      d.smoothed_positive = true;
      d.source = DecisionSource::kBaseline;
      d.confidence = score;
    }
    ++summary.windows;
    evaluator.Add(d);
    if (trace) {
      json line = json::parse(DecisionToJsonLine(d, d.raw_positive ? "anomaly" : "normal"));
      line["score"] = score;
      line["threshold"] = detector.threshold;
      Write(trace, line.dump());
    }
  }
  summary.report = evaluator.Finish();
  summary.elapsed_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return summary;
}

}  // namespace twinguard
