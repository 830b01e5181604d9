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

// Plant data model: tags, records, windows and ground-truth intervals, plus
// CSV ingestion and the synthetic scenario generator.
//
// Sensor values are stored normalized (engineering value divided by a per-tag
// scale), so detector thresholds apply without conversion. Actuators use the
// {0,1,2} encoding: 0 = transitioning, 1 = closed/off, 2 = open/on.

#ifndef TWINGUARD_TELEMETRY_H_
#define TWINGUARD_TELEMETRY_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twinguard {

enum class Tag { kLIT101, kFIT101, kAIT402, kMV101, kP101 };
enum class TagKind { kSensor, kActuator };

inline constexpr int kNumSensors = 3;
inline constexpr int kNumActuators = 2;
inline constexpr std::array<Tag, kNumSensors> kSensorTags = {
    Tag::kLIT101, Tag::kFIT101, Tag::kAIT402};
inline constexpr std::array<Tag, kNumActuators> kActuatorTags = {Tag::kMV101,
                                                                 Tag::kP101};
inline constexpr std::array<Tag, 5> kAllTags = {
    Tag::kLIT101, Tag::kFIT101, Tag::kAIT402, Tag::kMV101, Tag::kP101};

inline constexpr int kActuatorTransitioning = 0;
inline constexpr int kActuatorClosed = 1;
inline constexpr int kActuatorOpen = 2;

std::string_view TagName(Tag tag);
std::optional<Tag> ParseTag(std::string_view name);
TagKind KindOf(Tag tag);
// Position of a sensor tag in the sensor arrays (LIT101=0, FIT101=1,
// AIT402=2) or of an actuator tag in the actuator arrays (MV101=0, P101=1).
int SlotOf(Tag tag);

enum class Scenario { kBenign, kSpoofing, kValveForcing, kFreezeDos, kBiasDrift };
inline constexpr std::array<Scenario, 4> kAttackScenarios = {
    Scenario::kSpoofing, Scenario::kValveForcing, Scenario::kFreezeDos,
    Scenario::kBiasDrift};

std::string_view ScenarioName(Scenario scenario);
std::optional<Scenario> ParseScenario(std::string_view name);

struct TelemetryRecord {
  int64_t index = 0;
  std::array<double, kNumSensors> sensors{};
  std::array<int, kNumActuators> actuators{};
  Scenario label = Scenario::kBenign;

  double sensor(Tag tag) const { return sensors[SlotOf(tag)]; }
  int actuator(Tag tag) const { return actuators[SlotOf(tag)]; }

  bool operator==(const TelemetryRecord&) const = default;
};

// A contiguous trailing slice [end_index - length + 1, end_index].
struct Window {
  int64_t end_index = 0;
  int length = 0;
  std::array<std::vector<double>, kNumSensors> sensors;
  std::array<std::vector<int>, kNumActuators> actuators;
  std::vector<Scenario> labels;

  int64_t start_index() const { return end_index - length + 1; }
  std::span<const double> sensor(Tag tag) const { return sensors[SlotOf(tag)]; }
  std::span<const int> actuator(Tag tag) const {
    return actuators[SlotOf(tag)];
  }

  bool operator==(const Window&) const = default;
};

struct GroundTruthInterval {
  Scenario scenario = Scenario::kBenign;
  int64_t start = 0;
  int64_t end = 0;  // Inclusive.

  bool Contains(int64_t index) const { return index >= start && index <= end; }
  bool operator==(const GroundTruthInterval&) const = default;
};

// The four attack intervals of the reference scenario layout.
std::vector<GroundTruthInterval> DefaultScenarioIntervals();

// Maximal runs of non-benign labels, in index order.
std::vector<GroundTruthInterval> IntervalsFromLabels(
    std::span<const TelemetryRecord> records);

class TelemetryError : public std::runtime_error {
 public:
  enum class Code {
    kMissingTag,
    kUnknownTag,
    kNonContiguousIndex,
    kBadActuatorState,
    kMalformed,
    kInsufficientHistory,
    kOutOfRange,
    kIo,
  };

  TelemetryError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Parses the `index,LIT101,FIT101,AIT402,MV101,P101,label` CSV layout.
// Columns may appear in any order; every tag plus `index` and `label` is
// required and unknown columns are rejected. Rows must be sorted and
// contiguous from 0.
std::vector<TelemetryRecord> ParseCsv(std::istream& in);
std::vector<TelemetryRecord> ParseCsv(const std::filesystem::path& path);

// Reals are written with 17 significant digits, so parsing the output
// reproduces every double bit-for-bit.
void WriteCsv(std::ostream& out, std::span<const TelemetryRecord> records);
std::string SerializeCsv(std::span<const TelemetryRecord> records);
void WriteCsvFile(const std::filesystem::path& path,
                  std::span<const TelemetryRecord> records);

// Throws TelemetryError(kInsufficientHistory) when end_index < length - 1 and
// TelemetryError(kOutOfRange) when end_index is past the last record or
// length < 1.
Window SliceWindow(std::span<const TelemetryRecord> records, int64_t end_index,
                   int length);

struct GeneratorOptions {
  uint64_t seed = 42;
  int64_t rows = 1500;
  // When false the scenario injections are skipped, leaving the benign
  // recording the attacked run is built on.
  bool inject_attacks = true;
};

// Engineering-unit scale per sensor tag (LIT101 mm, FIT101 m3/h, AIT402
// analyzer units). Normalized value = engineering value / scale.
double TagScale(Tag tag);

// Deterministic for a fixed seed. Rows are clamped to at least 1400.
std::vector<TelemetryRecord> GenerateDataset(const GeneratorOptions& options);
std::vector<TelemetryRecord> GenerateDataset(uint64_t seed, int64_t rows);

struct DatasetMetadata {
  uint64_t seed = 0;
  int64_t rows = 0;
  bool attacks_injected = true;
  std::vector<GroundTruthInterval> intervals;

  std::string ToJson() const;
  static DatasetMetadata FromJson(std::string_view text);
};

DatasetMetadata MetadataFor(const GeneratorOptions& options,
                            std::span<const TelemetryRecord> records);

// Reads either a metadata document or a bare `{"intervals": [...]}` object.
std::vector<GroundTruthInterval> LoadIntervals(
    const std::filesystem::path& path);

}  // namespace twinguard

#endif  // TWINGUARD_TELEMETRY_H_
