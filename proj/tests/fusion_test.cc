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

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "smoothing_reference.h"

namespace twinguard {
namespace {

using testing::CompareExhaustively;
using testing::kTiers;
using testing::Raw;

int Checked(const testing::ExhaustiveResult& r) {
  EXPECT_FALSE(r.mismatch) << r.mismatch.value_or("");
  return r.sequences;
}

TEST(SmoothingOracleTest, DefaultHysteresisAllLength8Sequences) {
  EXPECT_EQ(Checked(CompareExhaustively(SmoothingConfig{}, kTiers, 8)), 6561);
}

TEST(SmoothingOracleTest, BypassBoundaryTier) {
  const std::vector<Raw> tiers = {
      {false, 0.0}, {true, 0.5}, {true, std::nextafter(0.95, 0.0)},
      {true, 0.95}};
  EXPECT_EQ(Checked(CompareExhaustively(SmoothingConfig{}, tiers, 8)), 65536);
}

TEST(SmoothingOracleTest, OtherHysteresisParameters) {
  for (int m = 1; m <= 3; ++m) {
    for (int k = 1; k <= 4; ++k) {
      SmoothingConfig cfg;
      cfg.window = 3;
      cfg.on_threshold = m;
      cfg.off_threshold = k;
      SCOPED_TRACE(::testing::Message() << "M=" << m << " K=" << k);
      EXPECT_EQ(Checked(CompareExhaustively(cfg, kTiers, 8)), 6561);
    }
  }
}

TEST(SmoothingOracleTest, MajorityPolicy) {
  for (int n : {1, 2, 3, 5, 6}) {
    SmoothingConfig cfg;
    cfg.policy = SmoothingPolicy::kMajority;
    cfg.window = n;
    cfg.on_threshold = 1;
    SCOPED_TRACE(n);
    EXPECT_EQ(Checked(CompareExhaustively(cfg, kTiers, 8)), 6561);
  }
}

TEST(SmoothingTest, WorkedExamples) {
  TemporalSmoother s(SmoothingConfig{});
  // One low-confidence positive is suppressed; a second one sets the alarm.
  EXPECT_FALSE(s.Push(true, 0.75));
  EXPECT_TRUE(s.Push(true, 0.75));
  EXPECT_TRUE(s.Push(false, 0.0));
  EXPECT_TRUE(s.Push(false, 0.0));
  EXPECT_FALSE(s.Push(false, 0.0));
  // A high-confidence positive bypasses the debounce.
  EXPECT_TRUE(s.Push(true, 0.97));
  EXPECT_TRUE(s.alarm());
}

TEST(SmoothingTest, ConfigValidation) {
  SmoothingConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.on_threshold = 6;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.off_threshold = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.bypass_confidence = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = {};
  c.window = 0;
  EXPECT_THROW(TemporalSmoother{c}, std::invalid_argument);
  EXPECT_EQ(ParseSmoothingPolicy("majority"), SmoothingPolicy::kMajority);
  EXPECT_EQ(SmoothingPolicyName(SmoothingPolicy::kHysteresis), "hysteresis");
  EXPECT_FALSE(ParseSmoothingPolicy("ewma"));
}

ThreatReport Report(Tactic tactic, double confidence) {
  ThreatReport r;
  r.tactic = tactic;
  r.technique = "t";
  if (tactic != Tactic::kNone) r.attack_paths = {"p"};
  r.confidence = confidence;
  return r;
}

TEST(FuseTest, HeuristicWinsOverReport) {
  HeuristicVerdict v;
  v.kind = AttackKind::kBiasDrift;
  v.confidence = 0.97;
  const Decision d = Fuse(7, v, Report(Tactic::kNone, 1.0));
  EXPECT_TRUE(d.raw_positive);
  EXPECT_EQ(d.index, 7);
  EXPECT_EQ(d.source, DecisionSource::kHeuristic);
  EXPECT_EQ(d.confidence, 0.97);
  EXPECT_EQ(d.scenario_guess, Scenario::kBiasDrift);
  EXPECT_FALSE(d.smoothed_positive);
}

TEST(FuseTest, ReportConfidenceThreshold) {
  const HeuristicVerdict abstain;
  Decision d = Fuse(1, abstain, Report(Tactic::kInhibitResponse, 0.5));
  EXPECT_TRUE(d.raw_positive);
  EXPECT_EQ(d.source, DecisionSource::kLlm);
  EXPECT_EQ(d.scenario_guess, Scenario::kFreezeDos);
  d = Fuse(1, abstain,
           Report(Tactic::kInhibitResponse, std::nextafter(0.5, 0.0)));
  EXPECT_FALSE(d.raw_positive);
  EXPECT_EQ(d.source, DecisionSource::kNone);
  EXPECT_FALSE(d.scenario_guess);
}

TEST(FuseTest, TacticMappingAndNone) {
  const HeuristicVerdict abstain;
  EXPECT_EQ(Fuse(1, abstain, Report(Tactic::kImpairProcessControl, 0.8))
                .scenario_guess,
            Scenario::kValveForcing);
  EXPECT_EQ(Fuse(1, abstain, Report(Tactic::kManipulationOfView, 0.8))
                .scenario_guess,
            Scenario::kSpoofing);
  EXPECT_FALSE(Fuse(1, abstain, Report(Tactic::kNone, 1.0)).raw_positive);
  EXPECT_FALSE(Fuse(1, abstain, std::nullopt).raw_positive);
}

TEST(FuseTest, SourceNamesRoundTrip) {
  for (const DecisionSource s : {DecisionSource::kNone, DecisionSource::kHeuristic,
                                 DecisionSource::kLlm, DecisionSource::kBaseline}) {
    EXPECT_EQ(ParseDecisionSource(DecisionSourceName(s)), s);
  }
}

}  // namespace
}  // namespace twinguard
