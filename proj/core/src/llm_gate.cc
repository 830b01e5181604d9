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

#include "twinguard/llm_gate.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "json.hpp"
#include "twinguard/llm_backend.h"

namespace twinguard {
namespace {

using json = nlohmann::json;

constexpr double kFreezePathMin = 0.8;
constexpr double kDriftSlopeMin = 1e-6;

std::string Num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += Num(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  out += ']';
  return out;
}

json FeaturesDocument(const FeatureVector& fv) {
  json sensors = json::object();
  for (const Tag tag : kSensorTags) {
    const SensorFeatures& f = fv.sensor(tag);
    sensors[std::string(TagName(tag))] = {
        {"slope", f.slope},
        {"std", f.std},
        {"detrended_std", f.detrended_std},
        {"range", f.range},
        {"net_change", f.net_change},
        {"flatness_ratio", f.flatness_ratio},
        {"freeze_ratio", f.freeze_ratio}};
  }
  json actuators = json::object();
  for (const Tag tag : kActuatorTags) {
    const ActuatorFeatures& a = fv.actuator(tag);
    actuators[std::string(TagName(tag))] = {
        {"toggle_count", a.toggle_count},
        {"active_fraction", a.active_fraction}};
  }
  return {{"window_end_index", fv.window_end_index},
          {"window_length", fv.window_length},
          {"history_len", fv.history_len},
          {"history_variance", fv.history_variance},
          {"sensors", sensors},
          {"actuators", actuators}};
}

// Top-level {...} spans, honoring JSON string quoting.
std::vector<std::string_view> ObjectSpans(std::string_view text) {
  std::vector<std::string_view> spans;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  size_t begin = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth++ == 0) begin = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) spans.push_back(text.substr(begin, i - begin + 1));
    }
  }
  if (depth != 0) spans.emplace_back();  // Unbalanced: force a violation.
  return spans;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool MentionsAny(const std::string& haystack,
                 std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(), [&](std::string_view n) {
    return haystack.find(n) != std::string::npos;
  });
}

SchemaViolation Violation(std::string reason) {
  return SchemaViolation{std::move(reason)};
}

std::optional<std::vector<std::string>> StringList(const json& value) {
  if (!value.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const json& item : value) {
    if (!item.is_string()) return std::nullopt;
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view TacticName(Tactic tactic) {
  switch (tactic) {
    case Tactic::kImpairProcessControl: return "impair-process-control";
    case Tactic::kInhibitResponse: return "inhibit-response";
    case Tactic::kManipulationOfView: return "manipulation-of-view";
    case Tactic::kNone: return "none";
  }
  return "?";
}

std::optional<Tactic> ParseTactic(std::string_view name) {
  for (const Tactic t :
       {Tactic::kImpairProcessControl, Tactic::kInhibitResponse,
        Tactic::kManipulationOfView, Tactic::kNone}) {
    if (TacticName(t) == name) return t;
  }
  return std::nullopt;
}

std::string ThreatReport::ToJson() const {
  json doc = json::object();
  doc["tactic"] = TacticName(tactic);
  doc["technique"] = technique;
  doc["attack_paths"] = attack_paths;
  doc["mitigations"] = mitigations;
  doc["confidence"] = confidence;
  // nlohmann orders object keys alphabetically; rebuild in schema order.
  std::string out = "{";
  bool first = true;
  for (const std::string_view field : kReportFields) {
    if (!first) out += ',';
    first = false;
    out += json(std::string(field)).dump();
    out += ':';
    out += doc[std::string(field)].dump();
  }
  out += '}';
  return out;
}

std::string ComposePrompt(const Window& window, const FeatureVector& fv,
                          std::span<const RecentVerdict> recent) {
  std::string p;
  p += "You are an ICS security analyst reviewing one telemetry window from "
       "stage 1 of a water treatment plant. Rule-based detectors did not "
       "classify this window.\n";
  p += "Window: indices " + std::to_string(window.start_index()) + ".." +
       std::to_string(window.end_index) + " (" +
       std::to_string(window.length) + " samples at 1 Hz).\n\n";

  p += "Sensor features (normalized units):\n";
  for (const Tag tag : kSensorTags) {
    const SensorFeatures& f = fv.sensor(tag);
    p += "  " + std::string(TagName(tag)) + ": slope=" + Num(f.slope) +
         " std=" + Num(f.std) + " detrended_std=" + Num(f.detrended_std) +
         " range=" + Num(f.range) + " net_change=" + Num(f.net_change) +
         " flatness_ratio=" + Num(f.flatness_ratio) +
         " freeze_ratio=" + Num(f.freeze_ratio) + "\n";
  }
  p += "Actuator states (0=transitioning, 1=closed/off, 2=open/on):\n";
  for (const Tag tag : kActuatorTags) {
    const ActuatorFeatures& a = fv.actuator(tag);
    p += "  " + std::string(TagName(tag)) +
         ": toggle_count=" + std::to_string(a.toggle_count) +
         " active_fraction=" + Num(a.active_fraction) +
         " states=" + JoinList(window.actuators[SlotOf(tag)]) + "\n";
  }
  p += "Sensor samples:\n";
  for (const Tag tag : kSensorTags) {
    p += "  " + std::string(TagName(tag)) + ": " +
         JoinList(window.sensors[SlotOf(tag)]) + "\n";
  }
  p += "Context: windows_processed=" + std::to_string(fv.history_len) +
       " level_variance=" + Num(fv.history_variance) + "\n";
  p += "Recent decisions:\n";
  if (recent.empty()) p += "  (none)\n";
  for (const RecentVerdict& r : recent) {
    p += "  index " + std::to_string(r.index) + ": " + r.verdict +
         (r.smoothed ? " (alarm active)\n" : " (no alarm)\n");
  }
  p += "FEATURES_JSON: " + FeaturesDocument(fv).dump() + "\n\n";

  p += "Respond with exactly one JSON object and no other text. Required "
       "fields:";
  for (const std::string_view field : kReportFields) {
    p += ' ';
    p += field;
  }
  p += "\nSchema:\n";
  p += "  tactic: one of";
  for (const Tactic t : {Tactic::kImpairProcessControl,
                         Tactic::kInhibitResponse, Tactic::kManipulationOfView,
                         Tactic::kNone}) {
    p += " \"" + std::string(TacticName(t)) + "\"";
  }
  p += "\n";
  p += "  technique: string naming the technique\n";
  p += "  attack_paths: array of strings, most likely first; empty if and "
       "only if tactic is \"none\"\n";
  p += "  mitigations: array of strings\n";
  p += "  confidence: number in [0, 1]\n";
  p += "No other fields are allowed. Only propose attack paths that the "
       "observed actuator states make physically possible.\n";
  return p;
}

std::variant<ThreatReport, SchemaViolation> ValidateSchema(
    std::string_view raw) {
  const std::vector<std::string_view> spans = ObjectSpans(raw);
  if (spans.empty()) return Violation("no JSON object found");
  if (spans.size() > 1) return Violation("more than one JSON object");
  if (spans.front().empty()) return Violation("unbalanced braces");

  json doc;
  try {
    doc = json::parse(spans.front());
  } catch (const json::parse_error& e) {
    return Violation(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) return Violation("top level is not an object");

  const std::set<std::string> allowed(std::begin(kReportFields),
                                      std::end(kReportFields));
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) return Violation("unknown field '" + key + "'");
  }
  for (const std::string_view field : kReportFields) {
    if (!doc.contains(std::string(field))) {
      return Violation("missing field '" + std::string(field) + "'");
    }
  }

  ThreatReport report;
  const json& tactic = doc["tactic"];
  if (!tactic.is_string()) return Violation("tactic must be a string");
  const auto parsed = ParseTactic(tactic.get<std::string>());
  if (!parsed) {
    return Violation("tactic '" + tactic.get<std::string>() +
                     "' not in vocabulary");
  }
  report.tactic = *parsed;

  const json& technique = doc["technique"];
  if (!technique.is_string() || technique.get<std::string>().empty()) {
    return Violation("technique must be a non-empty string");
  }
  report.technique = technique.get<std::string>();

  auto paths = StringList(doc["attack_paths"]);
  if (!paths) return Violation("attack_paths must be an array of strings");
  for (const std::string& path : *paths) {
    if (path.empty()) return Violation("attack_paths has an empty entry");
  }
  report.attack_paths = std::move(*paths);
  if ((report.tactic == Tactic::kNone) != report.attack_paths.empty()) {
    return Violation("attack_paths must be empty exactly when tactic is none");
  }

  auto mitigations = StringList(doc["mitigations"]);
  if (!mitigations) return Violation("mitigations must be an array of strings");
  report.mitigations = std::move(*mitigations);

  const json& confidence = doc["confidence"];
  if (!confidence.is_number()) return Violation("confidence must be a number");
  report.confidence = confidence.get<double>();
  if (!std::isfinite(report.confidence) || report.confidence < 0.0 ||
      report.confidence > 1.0) {
    return Violation("confidence " + Num(report.confidence) +
                     " outside [0,1]");
  }
  return report;
}

std::variant<ThreatReport, PlausibilityRejection> PlausibilityFilter(
    const ThreatReport& report, const FeatureVector& fv) {
  const int toggles = fv.actuator(Tag::kMV101).toggle_count;
  const bool actuators_idle = fv.actuator(Tag::kP101).active_fraction == 0.0 &&
                              fv.actuator(Tag::kMV101).active_fraction == 0.0;
  double max_freeze = 0.0;
  for (const SensorFeatures& f : fv.sensors) {
    max_freeze = std::max(max_freeze, f.freeze_ratio);
  }
  const double level_slope = std::abs(fv.sensor(Tag::kLIT101).slope);

  std::vector<std::string> claims = report.attack_paths;
  if (report.tactic != Tactic::kNone) claims.push_back(report.technique);
  for (const std::string& claim : claims) {
    const std::string text = Lower(claim);
    if (MentionsAny(text, {"valve", "mv101", "actuator toggl"}) &&
        toggles == 0) {
      return PlausibilityRejection{"valve manipulation claimed but MV101 "
                                   "never toggled: " + claim};
    }
    if (MentionsAny(text, {"spoof", "inflow"}) && actuators_idle) {
      return PlausibilityRejection{"inflow spoofing claimed with P101 and "
                                   "MV101 inactive: " + claim};
    }
    if (MentionsAny(text, {"freez", "frozen", "stale", "stuck"}) &&
        max_freeze < kFreezePathMin) {
      return PlausibilityRejection{"sensor freeze claimed but max "
                                   "freeze_ratio is " + Num(max_freeze)};
    }
    if (MentionsAny(text, {"drift", "bias"}) && level_slope <= kDriftSlopeMin) {
      return PlausibilityRejection{"drift claimed but LIT101 slope is " +
                                   Num(level_slope)};
    }
  }
  return report;
}

std::string_view GateStatusName(GateStatus status) {
  switch (status) {
    case GateStatus::kNotQueried: return "not_queried";
    case GateStatus::kAccepted: return "accepted";
    case GateStatus::kSchemaViolation: return "schema_violation";
    case GateStatus::kImplausible: return "implausible";
    case GateStatus::kUnavailable: return "unavailable";
  }
  return "?";
}

GateOutcome RunGate(LlmBackend& backend, const Window& window,
                    const FeatureVector& fv,
                    std::span<const RecentVerdict> recent) {
  GateOutcome outcome;
  std::string raw;
  try {
    raw = backend.Complete(ComposePrompt(window, fv, recent));
  } catch (const LlmUnavailable& e) {
    outcome.status = GateStatus::kUnavailable;
    outcome.detail = std::string(UnavailableReasonName(e.reason())) + ": " +
                     e.what();
    return outcome;
  }
  auto validated = ValidateSchema(raw);
  if (auto* v = std::get_if<SchemaViolation>(&validated)) {
    outcome.status = GateStatus::kSchemaViolation;
    outcome.detail = v->reason;
    return outcome;
  }
  auto filtered = PlausibilityFilter(std::get<ThreatReport>(validated), fv);
  if (auto* r = std::get_if<PlausibilityRejection>(&filtered)) {
    outcome.status = GateStatus::kImplausible;
    outcome.detail = r->reason;
    return outcome;
  }
  outcome.status = GateStatus::kAccepted;
  outcome.report = std::move(std::get<ThreatReport>(filtered));
  return outcome;
}

}  // namespace twinguard
