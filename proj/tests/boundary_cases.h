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

// Feature vectors on either side of each heuristic threshold.

#ifndef TWINGUARD_TESTS_BOUNDARY_CASES_H_
#define TWINGUARD_TESTS_BOUNDARY_CASES_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twinguard/features.h"
#include "twinguard/heuristics.h"

namespace twinguard::testing {

// Baselines on which exactly the named rule fires.
FeatureVector SpoofFeatures();
FeatureVector ValveFeatures();
FeatureVector DriftFeatures();
FeatureVector FreezeFeatures();

using Detector = std::function<std::optional<HeuristicVerdict>(
    const FeatureVector&, const HeuristicConfig&)>;

// One threshold probed from both sides: `fires` lies just on the firing side
// and `abstains` on the boundary side.
struct Straddle {
  std::string name;
  Detector detect;
  FeatureVector fires;
  FeatureVector abstains;
  HeuristicConfig cfg;
};

// Every rule threshold plus the history gates at h-1 / h.
std::vector<Straddle> Straddles();

}  // namespace twinguard::testing

#endif  // TWINGUARD_TESTS_BOUNDARY_CASES_H_
