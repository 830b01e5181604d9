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

#include "twinguard/heuristics.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace twinguard {
namespace {

template <typename T>
T ParseValue(std::string_view key, std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  T value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("bad value '" + std::string(text) +
                                "' for " + std::string(key));
  }
  return value;
}

// One table drives Set, Keys and ToKeyValueText so they cannot drift apart.
struct Field {
  std::string_view key;
  double HeuristicConfig::*real = nullptr;
  int64_t HeuristicConfig::*count = nullptr;
  int HeuristicConfig::*small = nullptr;
};

const std::array<Field, 20>& FieldTable() {
  using C = HeuristicConfig;
  static const std::array<Field, 20> table = {{
      {"spoof_min_history", nullptr, &C::spoof_min_history, nullptr},
      {"valve_min_history", nullptr, &C::valve_min_history, nullptr},
      {"valve_min_toggles", nullptr, nullptr, &C::valve_min_toggles},
      {"valve_osc_range", &C::valve_osc_range},
      {"drift_min_history", nullptr, &C::drift_min_history, nullptr},
      {"drift_slope_floor", &C::drift_slope_floor},
      {"drift_slope_std_mult", &C::drift_slope_std_mult},
      {"drift_std_min", &C::drift_std_min},
      {"drift_std_max", &C::drift_std_max},
      {"drift_flatness_max", &C::drift_flatness_max},
      {"dos_min_history", nullptr, &C::dos_min_history, nullptr},
      {"dos_freeze_min", &C::dos_freeze_min},
      {"dos_std_max", &C::dos_std_max},
      {"spoof_slope_min", &C::spoof_slope_min},
      {"spoof_consistency_tol", &C::spoof_consistency_tol},
      {"benign_var_floor", &C::benign_var_floor},
      {"spoof_confidence", &C::spoof_confidence},
      {"valve_confidence", &C::valve_confidence},
      {"drift_confidence", &C::drift_confidence},
      {"dos_confidence", &C::dos_confidence},
  }};
  return table;
}

std::string FormatReal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

HeuristicVerdict Fire(AttackKind kind, double confidence,
                      std::vector<Evidence> evidence) {
  return HeuristicVerdict{kind, confidence, std::move(evidence)};
}

// Tie-break rank: lower wins.
int Priority(AttackKind kind) {
  switch (kind) {
    case AttackKind::kFreezeDos: return 0;
    case AttackKind::kBiasDrift: return 1;
    case AttackKind::kValveForcing: return 2;
    case AttackKind::kSpoofing: return 3;
    case AttackKind::kAbstain: return 4;
  }
  return 4;
}

}  // namespace

void HeuristicConfig::Validate() const {
  for (const Field& f : FieldTable()) {
    const double v = f.real    ? this->*f.real
                     : f.count ? static_cast<double>(this->*f.count)
                               : static_cast<double>(this->*f.small);
    if (!(v > 0.0)) {
      throw std::invalid_argument(std::string(f.key) + " must be positive");
    }
  }
  if (!(drift_std_min < drift_std_max)) {
    throw std::invalid_argument("drift_std_min must be below drift_std_max");
  }
  if (spoof_consistency_tol >= 1.0) {
    throw std::invalid_argument("spoof_consistency_tol must be below 1");
  }
  for (const double c : {spoof_confidence, valve_confidence, drift_confidence,
                         dos_confidence}) {
    if (c > 1.0) throw std::invalid_argument("confidence must be <= 1");
  }
}

bool HeuristicConfig::Set(std::string_view key, std::string_view value) {
  for (const Field& f : FieldTable()) {
    if (f.key != key) continue;
    if (f.real) {
      this->*f.real = ParseValue<double>(key, value);
    } else if (f.count) {
      this->*f.count = ParseValue<int64_t>(key, value);
    } else {
      this->*f.small = ParseValue<int>(key, value);
    }
    return true;
  }
  return false;
}

HeuristicConfig HeuristicConfig::FromKeyValueText(std::string_view text) {
  HeuristicConfig cfg;
  int line_no = 0;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    std::string_view key = line.substr(0, eq);
    const size_t b = key.find_first_not_of(" \t");
    const size_t e = key.find_last_not_of(" \t");
    key = b == std::string_view::npos ? std::string_view{}
                                      : key.substr(b, e - b + 1);
    if (!cfg.Set(key, line.substr(eq + 1))) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": unknown key '" + std::string(key) + "'");
    }
  }
  cfg.Validate();
  return cfg;
}

HeuristicConfig HeuristicConfig::FromKeyValueFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return FromKeyValueText(buf.str());
}

std::string HeuristicConfig::ToKeyValueText() const {
  std::string out;
  for (const Field& f : FieldTable()) {
    out += f.key;
    out += " = ";
    if (f.real) {
      out += FormatReal(this->*f.real);
    } else if (f.count) {
      out += std::to_string(this->*f.count);
    } else {
      out += std::to_string(this->*f.small);
    }
    out += '\n';
  }
  return out;
}

const std::vector<std::string_view>& HeuristicConfig::Keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const Field& f : FieldTable()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::string_view AttackKindName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kSpoofing: return "spoofing";
    case AttackKind::kValveForcing: return "valve_forcing";
    case AttackKind::kBiasDrift: return "bias_drift";
    case AttackKind::kFreezeDos: return "freeze_dos";
    case AttackKind::kAbstain: return "abstain";
  }
  return "?";
}

std::optional<AttackKind> ParseAttackKind(std::string_view name) {
  for (const AttackKind k :
       {AttackKind::kSpoofing, AttackKind::kValveForcing,
        AttackKind::kBiasDrift, AttackKind::kFreezeDos, AttackKind::kAbstain}) {
    if (AttackKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<Scenario> ScenarioOf(AttackKind kind) {
  switch (kind) {
    case AttackKind::kSpoofing: return Scenario::kSpoofing;
    case AttackKind::kValveForcing: return Scenario::kValveForcing;
    case AttackKind::kBiasDrift: return Scenario::kBiasDrift;
    case AttackKind::kFreezeDos: return Scenario::kFreezeDos;
    case AttackKind::kAbstain: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<HeuristicVerdict> DetectSpoofing(const FeatureVector& fv,
                                               const HeuristicConfig& cfg) {
  const SensorFeatures& lit = fv.sensor(Tag::kLIT101);
  const double pump = fv.actuator(Tag::kP101).active_fraction;
  const double valve = fv.actuator(Tag::kMV101).active_fraction;
  const double needed = (1.0 - cfg.spoof_consistency_tol) * lit.range;
  if (!(lit.slope > cfg.spoof_slope_min)) return std::nullopt;
  if (!(pump > 0.0 || valve > 0.0)) return std::nullopt;
  if (!(lit.net_change >= needed)) return std::nullopt;
  if (!(fv.history_variance >= cfg.benign_var_floor)) return std::nullopt;
  if (!(fv.history_len >= cfg.spoof_min_history)) return std::nullopt;
  return Fire(AttackKind::kSpoofing, cfg.spoof_confidence,
              {{"LIT101.slope", lit.slope, cfg.spoof_slope_min, ">"},
               {"P101|MV101.active_fraction", std::max(pump, valve), 0.0, ">"},
               {"LIT101.net_change", lit.net_change, needed, ">="},
               {"history_variance", fv.history_variance, cfg.benign_var_floor,
                ">="},
               {"history_len", static_cast<double>(fv.history_len),
                static_cast<double>(cfg.spoof_min_history), ">="}});
}

std::optional<HeuristicVerdict> DetectValveForcing(const FeatureVector& fv,
                                                   const HeuristicConfig& cfg) {
  const int toggles = fv.actuator(Tag::kMV101).toggle_count;
  const double fit_range = fv.sensor(Tag::kFIT101).range;
  const double lit_range = fv.sensor(Tag::kLIT101).range;
  if (!(toggles >= cfg.valve_min_toggles)) return std::nullopt;
  if (!(fit_range > cfg.valve_osc_range || lit_range > cfg.valve_osc_range)) {
    return std::nullopt;
  }
  if (!(fv.history_len >= cfg.valve_min_history)) return std::nullopt;
  const bool by_flow = fit_range > cfg.valve_osc_range;
  return Fire(AttackKind::kValveForcing, cfg.valve_confidence,
              {{"MV101.toggle_count", static_cast<double>(toggles),
                static_cast<double>(cfg.valve_min_toggles), ">="},
               {by_flow ? "FIT101.range" : "LIT101.range",
                by_flow ? fit_range : lit_range, cfg.valve_osc_range, ">"},
               {"history_len", static_cast<double>(fv.history_len),
                static_cast<double>(cfg.valve_min_history), ">="}});
}

std::optional<HeuristicVerdict> DetectBiasDrift(const FeatureVector& fv,
                                                const HeuristicConfig& cfg) {
  const SensorFeatures& lit = fv.sensor(Tag::kLIT101);
  const double spread = lit.detrended_std;
  const double slope_min =
      std::max(cfg.drift_slope_floor, cfg.drift_slope_std_mult * spread);
  if (!(lit.slope > slope_min)) return std::nullopt;
  if (!(spread >= cfg.drift_std_min && spread <= cfg.drift_std_max)) {
    return std::nullopt;
  }
  if (!(lit.flatness_ratio < cfg.drift_flatness_max)) return std::nullopt;
  if (!(fv.history_len >= cfg.drift_min_history)) return std::nullopt;
  return Fire(AttackKind::kBiasDrift, cfg.drift_confidence,
              {{"LIT101.slope", lit.slope, slope_min, ">"},
               {"LIT101.detrended_std", spread, cfg.drift_std_min, ">="},
               {"LIT101.detrended_std", spread, cfg.drift_std_max, "<="},
               {"LIT101.flatness_ratio", lit.flatness_ratio,
                cfg.drift_flatness_max, "<"},
               {"history_len", static_cast<double>(fv.history_len),
                static_cast<double>(cfg.drift_min_history), ">="}});
}

std::optional<HeuristicVerdict> DetectFreezeDos(const FeatureVector& fv,
                                                const HeuristicConfig& cfg) {
  std::vector<Evidence> evidence;
  for (const Tag tag : kSensorTags) {
    const SensorFeatures& f = fv.sensor(tag);
    if (!(f.freeze_ratio >= cfg.dos_freeze_min)) continue;
    // Every channel that looks frozen must also be quiet.
    if (!(f.std <= cfg.dos_std_max)) return std::nullopt;
    const std::string name(TagName(tag));
    evidence.push_back(
        {name + ".freeze_ratio", f.freeze_ratio, cfg.dos_freeze_min, ">="});
    evidence.push_back({name + ".std", f.std, cfg.dos_std_max, "<="});
  }
  if (evidence.size() < 4) return std::nullopt;  // Fewer than 2 channels.
  if (!(fv.history_len >= cfg.dos_min_history)) return std::nullopt;
  evidence.push_back({"history_len", static_cast<double>(fv.history_len),
                      static_cast<double>(cfg.dos_min_history), ">="});
  return Fire(AttackKind::kFreezeDos, cfg.dos_confidence, std::move(evidence));
}

HeuristicVerdict EvaluateHeuristics(const FeatureVector& fv,
                                    const HeuristicConfig& cfg) {
  HeuristicVerdict best = HeuristicVerdict::Abstain();
  for (auto detect : {DetectFreezeDos, DetectBiasDrift, DetectValveForcing,
                      DetectSpoofing}) {
    std::optional<HeuristicVerdict> v = detect(fv, cfg);
    if (!v) continue;
    if (!best.fired() || v->confidence > best.confidence ||
        (v->confidence == best.confidence &&
         Priority(v->kind) < Priority(best.kind))) {
      best = std::move(*v);
    }
  }
  return best;
}

}  // namespace twinguard
