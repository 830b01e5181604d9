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

#include "twinguard/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;

std::string_view DisplayName(Scenario s) {
  switch (s) {
    case Scenario::kSpoofing: return "Spoofing / Inflow";
    case Scenario::kValveForcing: return "Valve Forcing";
    case Scenario::kFreezeDos: return "Sensor-Freezing DoS";
    case Scenario::kBiasDrift: return "Bias Drift";
    case Scenario::kBenign: return "Benign";
  }
  return "?";
}

std::string Pad(std::string_view s, size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

json OptionalInt(const std::optional<int64_t>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<int64_t> ReadOptionalInt(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<int64_t>();
}

}  // namespace

std::string EvalReport::ToJson() const {
  json scen = json::array();
  for (const ScenarioResult& r : scenarios) {
    scen.push_back({{"scenario", ScenarioName(r.scenario)},
                    {"start", r.start},
                    {"end", r.end},
                    {"detected", r.detected ? 1 : 0},
                    {"ttd", OptionalInt(r.ttd)},
                    {"first_alarm_index", OptionalInt(r.first_alarm_index)},
                    {"alarm_windows", r.alarm_windows}});
  }
  json regions = json::array();
  for (const FpRegion& r : fp_regions) regions.push_back({r.start, r.end});
  json doc = {{"scenarios", scen},
              {"fp_count", fp_count},
              {"fp_regions", regions},
              {"windows_evaluated", windows_evaluated},
              {"first_index", OptionalInt(first_index)},
              {"last_index", OptionalInt(last_index)},
              {"spillover_alarms", spillover_alarms},
              {"release_alarms", release_alarms},
              {"strict_fp_count", strict_fp_count}};
  return doc.dump(2) + "\n";
}

EvalReport EvalReport::FromJson(std::string_view text) {
  EvalReport report;
  try {
    const json doc = json::parse(text);
    for (const json& r : doc.at("scenarios")) {
      ScenarioResult s;
      const auto scenario = ParseScenario(r.at("scenario").get<std::string>());
      if (!scenario) throw std::invalid_argument("unknown scenario in report");
      s.scenario = *scenario;
      s.start = r.at("start").get<int64_t>();
      s.end = r.at("end").get<int64_t>();
      s.detected = r.at("detected").get<int>() != 0;
      s.ttd = ReadOptionalInt(r, "ttd");
      s.first_alarm_index = ReadOptionalInt(r, "first_alarm_index");
      s.alarm_windows = r.value("alarm_windows", int64_t{0});
      report.scenarios.push_back(s);
    }
    report.fp_count = doc.at("fp_count").get<int64_t>();
    for (const json& r : doc.at("fp_regions")) {
      report.fp_regions.push_back({r.at(0).get<int64_t>(), r.at(1).get<int64_t>()});
    }
    report.windows_evaluated = doc.at("windows_evaluated").get<int64_t>();
    report.first_index = ReadOptionalInt(doc, "first_index");
    report.last_index = ReadOptionalInt(doc, "last_index");
    report.spillover_alarms = doc.value("spillover_alarms", int64_t{0});
    report.release_alarms = doc.value("release_alarms", int64_t{0});
    report.strict_fp_count = doc.value("strict_fp_count", int64_t{0});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad report: ") + e.what());
  }
  return report;
}

std::string EvalReport::ToTable(std::string_view system_name) const {
  std::string out;
  out += "Detection (" + std::string(system_name) + ")\n";
  out += Pad("Scenario", 24) + Pad("Ground Truth", 15) + Pad("Detected", 10) +
         "TTD (windows)\n";
  for (const ScenarioResult& r : scenarios) {
    out += Pad(DisplayName(r.scenario), 24) +
           Pad(std::to_string(r.start) + "-" + std::to_string(r.end), 15) +
           Pad(r.detected ? "1" : "0", 10) +
           (r.ttd ? std::to_string(*r.ttd) : std::string("-")) + "\n";
  }
  out += "\nFalse positives";
  if (first_index && last_index) {
    out += " (windows " + std::to_string(*first_index) + "-" +
           std::to_string(*last_index) + ")";
  }
  const size_t name_width = std::max<size_t>(18, system_name.size() + 2);
  out += "\n" + Pad("System", name_width) + Pad("FPs", 8) + "FP Regions\n";
  std::string regions;
  for (const FpRegion& r : fp_regions) {
    if (!regions.empty()) regions += ", ";
    regions += r.start == r.end ? std::to_string(r.start)
                                : std::to_string(r.start) + "-" +
                                      std::to_string(r.end);
  }
  out += Pad(system_name, name_width) + Pad(std::to_string(fp_count), 8) +
         (regions.empty() ? std::string("-") : regions) + "\n";
  return out;
}

std::optional<int64_t> ComputeTtd(std::span<const Decision> decisions,
                                  const GroundTruthInterval& interval) {
  for (const Decision& d : decisions) {
    if (d.smoothed_positive && interval.Contains(d.index)) {
      return d.index - interval.start;
    }
  }
  return std::nullopt;
}

StreamingEvaluator::Tracker::Verdict StreamingEvaluator::Tracker::Judge(
    int64_t index, bool alarm, std::span<const GroundTruthInterval> intervals) {
  if (!alarm) {
    anchor.reset();
    prev_alarm_index.reset();
    return Verdict::kQuiet;
  }
  const bool contiguous = prev_alarm_index && *prev_alarm_index == index - 1;
  if (!contiguous) anchor.reset();
  prev_alarm_index = index;

  bool spill = false;
  for (const GroundTruthInterval& iv : intervals) {
    if (iv.Contains(index)) {
      anchor = index;
      return Verdict::kAttack;
    }
    if (index > iv.end && index <= iv.end + spillover) spill = true;
  }
  if (spill) {
    anchor = index;
    return Verdict::kSpillover;
  }
  if (anchor && index - *anchor <= grace) return Verdict::kRelease;
  return Verdict::kFalse;
}

StreamingEvaluator::StreamingEvaluator(std::vector<GroundTruthInterval> intervals,
                                       EvalConfig cfg)
    : intervals_(std::move(intervals)), cfg_(cfg) {
  for (const GroundTruthInterval& iv : intervals_) {
    ScenarioResult r;
    r.scenario = iv.scenario;
    r.start = iv.start;
    r.end = iv.end;
    report_.scenarios.push_back(r);
  }
  main_.spillover = cfg_.spillover_windows;
  main_.grace = cfg_.release_grace;
  strict_.spillover = 0;
  strict_.grace = cfg_.release_grace;
}

void StreamingEvaluator::Add(const Decision& d) {
  if (last_index_ && d.index <= *last_index_) {
    throw std::invalid_argument("decision indices must increase");
  }
  last_index_ = d.index;
  ++report_.windows_evaluated;
  if (!report_.first_index) report_.first_index = d.index;
  report_.last_index = d.index;

  using Verdict = Tracker::Verdict;
  const bool alarm = d.smoothed_positive;
  if (strict_.Judge(d.index, alarm, intervals_) == Verdict::kFalse) {
    ++report_.strict_fp_count;
  }
  switch (main_.Judge(d.index, alarm, intervals_)) {
    case Verdict::kQuiet:
      break;
    case Verdict::kAttack:
      for (ScenarioResult& r : report_.scenarios) {
        if (d.index < r.start || d.index > r.end) continue;
        ++r.alarm_windows;
        if (!r.detected) {
          r.detected = true;
          r.first_alarm_index = d.index;
          r.ttd = d.index - r.start;
        }
      }
      break;
    case Verdict::kSpillover:
      ++report_.spillover_alarms;
      break;
    case Verdict::kRelease:
      ++report_.release_alarms;
      break;
    case Verdict::kFalse:
      ++report_.fp_count;
      if (!report_.fp_regions.empty() &&
          report_.fp_regions.back().end == d.index - 1) {
        report_.fp_regions.back().end = d.index;
      } else {
        report_.fp_regions.push_back({d.index, d.index});
      }
      break;
  }
}

EvalReport StreamingEvaluator::Finish() const { return report_; }

EvalReport Evaluate(std::span<const Decision> decisions,
                    std::span<const GroundTruthInterval> intervals,
                    const EvalConfig& cfg) {
  StreamingEvaluator evaluator(
      std::vector<GroundTruthInterval>(intervals.begin(), intervals.end()), cfg);
  for (const Decision& d : decisions) evaluator.Add(d);
  return evaluator.Finish();
}

FalsePositiveSummary CountFalsePositives(
    std::span<const Decision> decisions,
    std::span<const GroundTruthInterval> intervals, const EvalConfig& cfg) {
  const EvalReport report = Evaluate(decisions, intervals, cfg);
  return {report.fp_count, report.fp_regions, report.spillover_alarms,
          report.release_alarms, report.strict_fp_count};
}

std::string DecisionToJsonLine(const Decision& d, std::string_view verdict) {
  const json line = {
      {"index", d.index},
      {"verdict", verdict},
      {"source", DecisionSourceName(d.source)},
      {"confidence", d.confidence},
      {"raw", d.raw_positive},
      {"smoothed", d.smoothed_positive},
      {"scenario_guess", d.scenario_guess
                             ? json(ScenarioName(*d.scenario_guess))
                             : json(nullptr)}};
  return line.dump();
}

Decision DecisionFromJsonLine(std::string_view line) {
  Decision d;
  try {
    const json doc = json::parse(line);
    d.index = doc.at("index").get<int64_t>();
    d.raw_positive = doc.at("raw").get<bool>();
    d.smoothed_positive = doc.at("smoothed").get<bool>();
    d.confidence = doc.at("confidence").get<double>();
    const auto source = ParseDecisionSource(doc.at("source").get<std::string>());
    if (!source) throw std::invalid_argument("unknown decision source");
    d.source = *source;
    const json& guess = doc.at("scenario_guess");
    if (!guess.is_null()) {
      d.scenario_guess = ParseScenario(guess.get<std::string>());
      if (!d.scenario_guess) throw std::invalid_argument("unknown scenario");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad trace line: ") + e.what());
  }
  return d;
}

std::vector<Decision> ReadTrace(std::istream& in) {
  std::vector<Decision> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(DecisionFromJsonLine(line));
  }
  return out;
}

std::vector<Decision> ReadTraceFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ReadTrace(in);
}

}  // namespace twinguard
