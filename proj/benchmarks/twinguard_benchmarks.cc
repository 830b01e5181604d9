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

#include <vector>

#include "benchmark/benchmark.h"
#include "twinguard/features.h"
#include "twinguard/heuristics.h"
#include "twinguard/iforest.h"
#include "twinguard/llm_backend.h"
#include "twinguard/orchestrator.h"
#include "twinguard/telemetry.h"

namespace twinguard {
namespace {

const std::vector<TelemetryRecord>& Attacked() {
  static const auto* records =
      new std::vector<TelemetryRecord>(GenerateDataset(42, 1500));
  return *records;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const Window w = SliceWindow(Attacked(), 940, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExtractFeatures(w, 900, 0.01));
  }
}
BENCHMARK(BM_ExtractFeatures)->Arg(15)->Arg(30)->Arg(120);

void BM_EvaluateHeuristics(benchmark::State& state) {
  const FeatureVector fv =
      ExtractFeatures(SliceWindow(Attacked(), 1250, 30), 1222, 0.01);
  const HeuristicConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateHeuristics(fv, cfg));
  }
}
BENCHMARK(BM_EvaluateHeuristics);

void BM_GenerateDataset(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(GenerateDataset(42, state.range(0)));
  }
}
BENCHMARK(BM_GenerateDataset)->Arg(1500)->Arg(10000);

void BM_DetectorRun(benchmark::State& state) {
  for (auto _ : state) {
    EmbeddedReplay replay(Attacked());
    MockLlmBackend mock;
    benchmark::DoNotOptimize(
        RunDetector(RunConfig{}, replay, mock, nullptr, DefaultScenarioIntervals()));
  }
  state.SetItemsProcessed(state.iterations() * 1371);
}
BENCHMARK(BM_DetectorRun)->Unit(benchmark::kMillisecond);

void BM_IForestFit(benchmark::State& state) {
  const auto benign = GenerateDataset(GeneratorOptions{42, 1500, false});
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainIForestDetector(benign, {}));
  }
}
BENCHMARK(BM_IForestFit)->Unit(benchmark::kMillisecond);

void BM_IForestScore(benchmark::State& state) {
  const IForestDetector det =
      TrainIForestDetector(GenerateDataset(GeneratorOptions{42, 1500, false}), {});
  const Window w = SliceWindow(Attacked(), 940, det.window_length);
  for (auto _ : state) {
    benchmark::DoNotOptimize(det.ScoreWindow(w));
  }
}
BENCHMARK(BM_IForestScore);

}  // namespace
}  // namespace twinguard

BENCHMARK_MAIN();
