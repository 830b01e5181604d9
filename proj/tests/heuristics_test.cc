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

#include <cmath>
#include <functional>
#include <string>

#include "boundary_cases.h"
#include "gtest/gtest.h"
#include "test_support.h"

namespace twinguard {
namespace {

using testing::DriftFeatures;
using testing::FreezeFeatures;
using testing::QuietFeatures;
using testing::SpoofFeatures;
using testing::Straddle;
using testing::Straddles;
using testing::ValveFeatures;

const HeuristicConfig kCfg;

TEST(BoundarySuiteTest, EveryThresholdStraddles) {
  const auto cases = Straddles();
  EXPECT_EQ(cases.size(), 19u);
  for (const Straddle& s : cases) {
    SCOPED_TRACE(s.name);
    EXPECT_TRUE(s.detect(s.fires, s.cfg).has_value());
    EXPECT_FALSE(s.detect(s.abstains, s.cfg).has_value());
  }
}

TEST(SpoofingTest, BaselineFiresWithEvidence) {
  const auto v = DetectSpoofing(SpoofFeatures(), kCfg);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, AttackKind::kSpoofing);
  EXPECT_EQ(v->confidence, 0.85);
  ASSERT_FALSE(v->evidence.empty());
  EXPECT_EQ(v->evidence.front().feature, "LIT101.slope");
  EXPECT_EQ(v->evidence.front().comparator, ">");
  EXPECT_EQ(v->evidence.front().threshold, 0.003);
}

TEST(SpoofingTest, FlatLevelAbstains) {
  FeatureVector fv = SpoofFeatures();
  fv.sensor(Tag::kLIT101).slope = 0.0;
  EXPECT_FALSE(DetectSpoofing(fv, kCfg));
}

TEST(ValveTest, ExactRangeAbstains) {
  FeatureVector fv = ValveFeatures();
  fv.actuator(Tag::kMV101).toggle_count = 1;
  fv.sensor(Tag::kFIT101).range = 0.03;
  EXPECT_FALSE(DetectValveForcing(fv, kCfg));
  fv.actuator(Tag::kMV101).toggle_count = 0;
  fv.sensor(Tag::kFIT101).range = 10.0;
  fv.sensor(Tag::kLIT101).range = 10.0;
  EXPECT_FALSE(DetectValveForcing(fv, kCfg));
}

TEST(DriftTest, ConstructedExamples) {
  const auto v = DetectBiasDrift(DriftFeatures(), kCfg);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->confidence, 0.97);
  FeatureVector fv = DriftFeatures();
  fv.sensor(Tag::kLIT101).slope = 0.004;
  fv.sensor(Tag::kLIT101).std = 0.003;
  fv.sensor(Tag::kLIT101).detrended_std = 0.003;
  EXPECT_FALSE(DetectBiasDrift(fv, kCfg));
}

TEST(FreezeTest, OneChannelAbstainsTwoFire) {
  FeatureVector fv = FreezeFeatures();
  const auto v = DetectFreezeDos(fv, kCfg);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->confidence, 0.97);
  fv.sensor(Tag::kLIT101).freeze_ratio = 0.0;
  fv.sensor(Tag::kFIT101).freeze_ratio = 0.0;
  EXPECT_FALSE(DetectFreezeDos(fv, kCfg));
}

TEST(FreezeTest, FrozenButNoisyChannelVetoes) {
  FeatureVector fv = FreezeFeatures();
  fv.sensor(Tag::kLIT101).std = 0.02;
  EXPECT_FALSE(DetectFreezeDos(fv, kCfg));
}

TEST(EvaluateTest, QuietWindowAbstainsWithNoEvidence) {
  const HeuristicVerdict v = EvaluateHeuristics(QuietFeatures(), kCfg);
  EXPECT_FALSE(v.fired());
  EXPECT_EQ(v.kind, AttackKind::kAbstain);
  EXPECT_EQ(v.confidence, 0.0);
  EXPECT_TRUE(v.evidence.empty());
}

TEST(EvaluateTest, SingleRuleWins) {
  EXPECT_EQ(EvaluateHeuristics(ValveFeatures(), kCfg).kind,
            AttackKind::kValveForcing);
  EXPECT_EQ(EvaluateHeuristics(SpoofFeatures(), kCfg).kind,
            AttackKind::kSpoofing);
}

TEST(EvaluateTest, FreezeBeatsDriftOnATie) {
  FeatureVector fv = FreezeFeatures();
  fv.sensor(Tag::kLIT101) = DriftFeatures().sensor(Tag::kLIT101);
  ASSERT_TRUE(DetectFreezeDos(fv, kCfg));
  ASSERT_TRUE(DetectBiasDrift(fv, kCfg));
  EXPECT_EQ(EvaluateHeuristics(fv, kCfg).kind, AttackKind::kFreezeDos);
}

TEST(EvaluateTest, HigherConfidenceBeatsOrder) {
  // Drift (0.97) and spoofing (0.85) both fire.
  FeatureVector fv = DriftFeatures();
  fv.sensor(Tag::kLIT101).range = 0.3;
  fv.sensor(Tag::kLIT101).net_change = 0.29;
  fv.actuator(Tag::kP101).active_fraction = 1.0;
  ASSERT_TRUE(DetectSpoofing(fv, kCfg));
  EXPECT_EQ(EvaluateHeuristics(fv, kCfg).kind, AttackKind::kBiasDrift);

  HeuristicConfig cfg;
  cfg.spoof_confidence = 0.99;
  EXPECT_EQ(EvaluateHeuristics(fv, cfg).kind, AttackKind::kSpoofing);
  cfg.spoof_confidence = 0.97;  // Tie: drift ranks above spoofing.
  EXPECT_EQ(EvaluateHeuristics(fv, cfg).kind, AttackKind::kBiasDrift);
}

TEST(EvaluateTest, MonotoneInHistory) {
  for (const FeatureVector& base :
       {SpoofFeatures(), ValveFeatures(), DriftFeatures(), FreezeFeatures()}) {
    bool fired = false;
    for (int64_t h = 0; h <= 200; ++h) {
      FeatureVector fv = base;
      fv.history_len = h;
      const bool now = EvaluateHeuristics(fv, kCfg).fired();
      EXPECT_TRUE(now || !fired) << "stopped firing at " << h;
      fired = now;
    }
    EXPECT_TRUE(fired);
  }
}

// Features as the detection loop sees them: windows counted from 29 and
// level variance over every sample seen so far.
FeatureVector LoopFeatures(const std::vector<TelemetryRecord>& r,
                           int64_t end) {
  HistoryTracker level;
  for (int64_t i = 0; i <= end; ++i) level.Observe(r[i].sensor(Tag::kLIT101));
  return ExtractFeatures(SliceWindow(r, end, 30), end - 28, level.variance());
}

TEST(GeneratedWindowsTest, EachScenarioFiresItsRule) {
  const auto& r = testing::Seed42();
  EXPECT_TRUE(DetectSpoofing(LoopFeatures(r, 229), kCfg));
  for (int64_t end = 529; end <= 539; ++end) {
    EXPECT_TRUE(DetectValveForcing(LoopFeatures(r, end), kCfg)) << end;
  }
  for (int64_t end = 929; end <= 949; ++end) {
    EXPECT_EQ(EvaluateHeuristics(LoopFeatures(r, end), kCfg).kind,
              AttackKind::kFreezeDos)
        << end;
  }
  for (int64_t end = 1229; end <= 1279; ++end) {
    EXPECT_TRUE(DetectBiasDrift(LoopFeatures(r, end), kCfg)) << end;
  }
}

TEST(GeneratedWindowsTest, SpoofShapeBelowHistoryGateAbstains) {
  FeatureVector fv = LoopFeatures(testing::Seed42(), 229);
  fv.history_len = 39;
  EXPECT_FALSE(DetectSpoofing(fv, kCfg));
}

TEST(GeneratedWindowsTest, NoRuleFiresOnAFullyBenignWindow) {
  const auto& r = testing::Seed42();
  HistoryTracker level;
  for (int64_t i = 0; i < 29; ++i) level.Observe(r[i].sensor(Tag::kLIT101));
  int benign_windows = 0;
  for (int64_t end = 29; end <= 1399; ++end) {
    level.Observe(r[end].sensor(Tag::kLIT101));
    const Window w = SliceWindow(r, end, 30);
    bool benign = true;
    for (const Scenario s : w.labels) benign &= s == Scenario::kBenign;
    if (!benign) continue;
    ++benign_windows;
    const FeatureVector fv = ExtractFeatures(w, end - 28, level.variance());
    ASSERT_FALSE(EvaluateHeuristics(fv, kCfg).fired()) << "index " << end;
  }
  EXPECT_EQ(benign_windows, 1371 - 4 * 29 - (30 + 40 + 50 + 80));
}

TEST(ConfigTest, DefaultsAreValid) {
  EXPECT_NO_THROW(kCfg.Validate());
  EXPECT_EQ(kCfg.spoof_min_history, 40);
  EXPECT_EQ(kCfg.drift_min_history, 70);
  EXPECT_EQ(kCfg.dos_min_history, 80);
  EXPECT_EQ(kCfg.benign_var_floor, 1e-4);
}

TEST(ConfigTest, InvalidConfigsThrow) {
  HeuristicConfig c;
  c.drift_std_min = 0.07;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.valve_osc_range = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.spoof_consistency_tol = 1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.dos_confidence = 1.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(ConfigTest, KeyValueRoundTripAndOverrides) {
  HeuristicConfig c;
  EXPECT_TRUE(c.Set("valve_osc_range", "0.05"));
  EXPECT_TRUE(c.Set("dos_min_history", "90"));
  EXPECT_FALSE(c.Set("lit301_range", "0.1"));
  EXPECT_THROW(c.Set("valve_osc_range", "wide"), std::invalid_argument);
  EXPECT_EQ(c.valve_osc_range, 0.05);
  EXPECT_EQ(c.dos_min_history, 90);

  const HeuristicConfig back = HeuristicConfig::FromKeyValueText(c.ToKeyValueText());
  EXPECT_EQ(back.ToKeyValueText(), c.ToKeyValueText());
  EXPECT_EQ(back.valve_osc_range, 0.05);

  const HeuristicConfig parsed = HeuristicConfig::FromKeyValueText(
      "# tuned\n  spoof_slope_min = 0.004  \n\ndrift_flatness_max=0.8 # note\n");
  EXPECT_EQ(parsed.spoof_slope_min, 0.004);
  EXPECT_EQ(parsed.drift_flatness_max, 0.8);
  EXPECT_THROW(HeuristicConfig::FromKeyValueText("bogus = 1\n"),
               std::invalid_argument);
  EXPECT_THROW(HeuristicConfig::FromKeyValueText("spoof_slope_min\n"),
               std::invalid_argument);
}

TEST(ConfigTest, EveryKeyIsSettable) {
  for (const std::string_view key : HeuristicConfig::Keys()) {
    HeuristicConfig c;
    EXPECT_TRUE(c.Set(key, "1")) << key;
  }
  EXPECT_GE(HeuristicConfig::Keys().size(), 16u);
}

TEST(AttackKindTest, NamesAndScenarios) {
  for (const AttackKind k : {AttackKind::kSpoofing, AttackKind::kValveForcing,
                             AttackKind::kBiasDrift, AttackKind::kFreezeDos,
                             AttackKind::kAbstain}) {
    EXPECT_EQ(ParseAttackKind(AttackKindName(k)), k);
  }
  EXPECT_EQ(ScenarioOf(AttackKind::kFreezeDos), Scenario::kFreezeDos);
  EXPECT_FALSE(ScenarioOf(AttackKind::kAbstain).has_value());
}

}  // namespace
}  // namespace twinguard
