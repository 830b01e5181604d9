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

#include "twinguard/telemetry.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;
using Code = TelemetryError::Code;

constexpr std::string_view kIndexColumn = "index";
constexpr std::string_view kLabelColumn = "label";

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T ParseNumber(std::string_view field, int64_t line_no, std::string_view column) {
  field = Trim(field);
  T value{};
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  // from_chars rejects a leading '+', which some CSV writers emit.
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw TelemetryError(Code::kMalformed,
                         "line " + std::to_string(line_no) + ": bad value '" +
                             std::string(field) + "' in column " +
                             std::string(column));
  }
  return value;
}

struct ColumnMap {
  int index = -1;
  int label = -1;
  std::array<int, 5> tags{-1, -1, -1, -1, -1};
  size_t width = 0;
};

ColumnMap ParseHeader(std::string_view line) {
  ColumnMap map;
  const auto fields = SplitFields(line);
  map.width = fields.size();
  for (size_t i = 0; i < fields.size(); ++i) {
    const std::string_view name = Trim(fields[i]);
    int* slot = nullptr;
    if (name == kIndexColumn) {
      slot = &map.index;
    } else if (name == kLabelColumn) {
      slot = &map.label;
    } else if (const auto tag = ParseTag(name)) {
      slot = &map.tags[static_cast<int>(*tag)];
    } else {
      throw TelemetryError(Code::kUnknownTag,
                           "unknown column '" + std::string(name) + "'");
    }
    if (*slot != -1) {
      throw TelemetryError(Code::kMalformed,
                           "duplicate column '" + std::string(name) + "'");
    }
    *slot = static_cast<int>(i);
  }
  for (const Tag tag : kAllTags) {
    if (map.tags[static_cast<int>(tag)] == -1) {
      throw TelemetryError(Code::kMissingTag,
                           "header lacks tag " + std::string(TagName(tag)));
    }
  }
  if (map.index == -1 || map.label == -1) {
    throw TelemetryError(Code::kMissingTag,
                         "header lacks the index or label column");
  }
  return map;
}

void FormatDouble(std::string& out, double value) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general,
                    17);
  out.append(buf, ptr);
}

}  // namespace

std::string_view TagName(Tag tag) {
  switch (tag) {
    case Tag::kLIT101: return "LIT101";
    case Tag::kFIT101: return "FIT101";
    case Tag::kAIT402: return "AIT402";
    case Tag::kMV101: return "MV101";
    case Tag::kP101: return "P101";
  }
  return "?";
}

std::optional<Tag> ParseTag(std::string_view name) {
  for (const Tag tag : kAllTags) {
    if (TagName(tag) == name) return tag;
  }
  return std::nullopt;
}

TagKind KindOf(Tag tag) {
  return (tag == Tag::kMV101 || tag == Tag::kP101) ? TagKind::kActuator
                                                  : TagKind::kSensor;
}

int SlotOf(Tag tag) {
  switch (tag) {
    case Tag::kLIT101: return 0;
    case Tag::kFIT101: return 1;
    case Tag::kAIT402: return 2;
    case Tag::kMV101: return 0;
    case Tag::kP101: return 1;
  }
  return 0;
}

std::string_view ScenarioName(Scenario scenario) {
  switch (scenario) {
    case Scenario::kBenign: return "benign";
    case Scenario::kSpoofing: return "spoofing";
    case Scenario::kValveForcing: return "valve_forcing";
    case Scenario::kFreezeDos: return "freeze_dos";
    case Scenario::kBiasDrift: return "bias_drift";
  }
  return "?";
}

std::optional<Scenario> ParseScenario(std::string_view name) {
  for (const Scenario s :
       {Scenario::kBenign, Scenario::kSpoofing, Scenario::kValveForcing,
        Scenario::kFreezeDos, Scenario::kBiasDrift}) {
    if (ScenarioName(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<GroundTruthInterval> DefaultScenarioIntervals() {
  return {{Scenario::kSpoofing, 200, 229},
          {Scenario::kValveForcing, 500, 539},
          {Scenario::kFreezeDos, 900, 949},
          {Scenario::kBiasDrift, 1200, 1279}};
}

std::vector<GroundTruthInterval> IntervalsFromLabels(
    std::span<const TelemetryRecord> records) {
  std::vector<GroundTruthInterval> out;
  for (const TelemetryRecord& r : records) {
    if (r.label == Scenario::kBenign) continue;
    if (!out.empty() && out.back().scenario == r.label &&
        out.back().end + 1 == r.index) {
      out.back().end = r.index;
    } else {
      out.push_back({r.label, r.index, r.index});
    }
  }
  return out;
}

std::vector<TelemetryRecord> ParseCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw TelemetryError(Code::kMalformed, "empty telemetry file");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const ColumnMap map = ParseHeader(line);

  std::vector<TelemetryRecord> records;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(line);
    if (fields.size() != map.width) {
      throw TelemetryError(Code::kMalformed,
                           "line " + std::to_string(line_no) + ": expected " +
                               std::to_string(map.width) + " fields");
    }
    TelemetryRecord r;
    r.index = ParseNumber<int64_t>(fields[map.index], line_no, kIndexColumn);
    const auto expected = static_cast<int64_t>(records.size());
    if (r.index != expected) {
      throw TelemetryError(Code::kNonContiguousIndex,
                           "line " + std::to_string(line_no) + ": index " +
                               std::to_string(r.index) + ", expected " +
                               std::to_string(expected));
    }
    for (const Tag tag : kSensorTags) {
      r.sensors[SlotOf(tag)] = ParseNumber<double>(
          fields[map.tags[static_cast<int>(tag)]], line_no, TagName(tag));
    }
    for (const Tag tag : kActuatorTags) {
      const std::string_view raw = Trim(fields[map.tags[static_cast<int>(tag)]]);
      // Integral states only; "2.0" style floats are accepted if exact.
      const double value = ParseNumber<double>(raw, line_no, TagName(tag));
      if (value != 0.0 && value != 1.0 && value != 2.0) {
        throw TelemetryError(Code::kBadActuatorState,
                             "line " + std::to_string(line_no) + ": " +
                                 std::string(TagName(tag)) + "=" +
                                 std::string(raw));
      }
      r.actuators[SlotOf(tag)] = static_cast<int>(value);
    }
    const std::string_view label = Trim(fields[map.label]);
    const auto scenario = ParseScenario(label);
    if (!scenario) {
      throw TelemetryError(Code::kMalformed,
                           "line " + std::to_string(line_no) +
                               ": unknown label '" + std::string(label) + "'");
    }
    r.label = *scenario;
    records.push_back(r);
  }
  return records;
}

std::vector<TelemetryRecord> ParseCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TelemetryError(Code::kIo, "cannot open " + path.string());
  }
  return ParseCsv(in);
}

void WriteCsv(std::ostream& out, std::span<const TelemetryRecord> records) {
  out << "index,LIT101,FIT101,AIT402,MV101,P101,label\n";
  std::string row;
  for (const TelemetryRecord& r : records) {
    row.clear();
    row += std::to_string(r.index);
    for (const double v : r.sensors) {
      row += ',';
      FormatDouble(row, v);
    }
    for (const int a : r.actuators) {
      row += ',';
      row += std::to_string(a);
    }
    row += ',';
    row += ScenarioName(r.label);
    row += '\n';
    out << row;
  }
}

std::string SerializeCsv(std::span<const TelemetryRecord> records) {
  std::ostringstream out;
  WriteCsv(out, records);
  return out.str();
}

void WriteCsvFile(const std::filesystem::path& path,
                  std::span<const TelemetryRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TelemetryError(Code::kIo, "cannot write " + path.string());
  WriteCsv(out, records);
  out.flush();
  if (!out) throw TelemetryError(Code::kIo, "write failed: " + path.string());
}

Window SliceWindow(std::span<const TelemetryRecord> records, int64_t end_index,
                   int length) {
  if (length < 1) {
    throw TelemetryError(Code::kOutOfRange,
                         "window length must be positive, got " +
                             std::to_string(length));
  }
  if (end_index < length - 1) {
    throw TelemetryError(Code::kInsufficientHistory,
                         "index " + std::to_string(end_index) +
                             " has fewer than " + std::to_string(length) +
                             " samples of history");
  }
  if (end_index >= static_cast<int64_t>(records.size())) {
    throw TelemetryError(Code::kOutOfRange,
                         "index " + std::to_string(end_index) +
                             " beyond dataset of " +
                             std::to_string(records.size()) + " rows");
  }
  Window w;
  w.end_index = end_index;
  w.length = length;
  for (auto& s : w.sensors) s.reserve(length);
  for (auto& a : w.actuators) a.reserve(length);
  w.labels.reserve(length);
  for (int64_t i = end_index - length + 1; i <= end_index; ++i) {
    const TelemetryRecord& r = records[i];
    for (int k = 0; k < kNumSensors; ++k) w.sensors[k].push_back(r.sensors[k]);
    for (int k = 0; k < kNumActuators; ++k) {
      w.actuators[k].push_back(r.actuators[k]);
    }
    w.labels.push_back(r.label);
  }
  return w;
}

std::string DatasetMetadata::ToJson() const {
  json doc;
  doc["seed"] = seed;
  doc["rows"] = rows;
  doc["attacks_injected"] = attacks_injected;
  doc["sample_rate_hz"] = 1;
  json scales = json::object();
  for (const Tag tag : kSensorTags) scales[std::string(TagName(tag))] = TagScale(tag);
  doc["scales"] = scales;
  json list = json::array();
  for (const auto& iv : intervals) {
    list.push_back({{"scenario", ScenarioName(iv.scenario)},
                    {"start", iv.start},
                    {"end", iv.end}});
  }
  doc["intervals"] = list;
  return doc.dump(2) + "\n";
}

DatasetMetadata DatasetMetadata::FromJson(std::string_view text) {
  DatasetMetadata meta;
  try {
    const json doc = json::parse(text);
    meta.seed = doc.value("seed", uint64_t{0});
    meta.rows = doc.value("rows", int64_t{0});
    meta.attacks_injected = doc.value("attacks_injected", true);
    for (const json& iv : doc.at("intervals")) {
      const auto scenario =
          ParseScenario(iv.at("scenario").get<std::string>());
      if (!scenario || *scenario == Scenario::kBenign) {
        throw TelemetryError(Code::kMalformed, "bad interval scenario");
      }
      GroundTruthInterval g{*scenario, iv.at("start").get<int64_t>(),
                            iv.at("end").get<int64_t>()};
      if (g.start > g.end) {
        throw TelemetryError(Code::kMalformed, "interval start after end");
      }
      meta.intervals.push_back(g);
    }
  } catch (const json::exception& e) {
    throw TelemetryError(Code::kMalformed,
                         std::string("bad metadata document: ") + e.what());
  }
  return meta;
}

DatasetMetadata MetadataFor(const GeneratorOptions& options,
                            std::span<const TelemetryRecord> records) {
  DatasetMetadata meta;
  meta.seed = options.seed;
  meta.rows = static_cast<int64_t>(records.size());
  meta.attacks_injected = options.inject_attacks;
  meta.intervals = IntervalsFromLabels(records);
  return meta;
}

std::vector<GroundTruthInterval> LoadIntervals(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TelemetryError(Code::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return DatasetMetadata::FromJson(buf.str()).intervals;
}

}  // namespace twinguard
