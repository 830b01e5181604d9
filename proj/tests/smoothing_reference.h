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

// Brute-force reference for temporal smoothing and an exhaustive comparison
// driver.

#ifndef TWINGUARD_TESTS_SMOOTHING_REFERENCE_H_
#define TWINGUARD_TESTS_SMOOTHING_REFERENCE_H_

#include <optional>
#include <string>
#include <vector>

#include "twinguard/fusion.h"

namespace twinguard::testing {

struct Raw {
  bool positive;
  double confidence;
};

// Reference automaton, stated over explicit look-back windows:
//   onset(t)   = raw(t) and (conf(t) >= B or raw(t-M+1..t) all positive)
//   release(t) = raw(t-K+1..t) all negative
//   alarm(t)   = alarm(t-1) ? not release(t) : onset(t)
inline std::vector<bool> ReferenceHysteresis(const std::vector<Raw>& raw,
                                      const SmoothingConfig& cfg) {
  std::vector<bool> out;
  bool alarm = false;
  const int n = static_cast<int>(raw.size());
  for (int t = 0; t < n; ++t) {
    auto all = [&](int len, bool want) {
      if (t + 1 < len) return false;
      for (int i = t - len + 1; i <= t; ++i) {
        if (raw[i].positive != want) return false;
      }
      return true;
    };
    if (!alarm) {
      alarm = raw[t].positive &&
              (raw[t].confidence >= cfg.bypass_confidence ||
               all(cfg.on_threshold, true));
    } else {
      alarm = !all(cfg.off_threshold, false);
    }
    out.push_back(alarm);
  }
  return out;
}

inline std::vector<bool> ReferenceMajority(const std::vector<Raw>& raw, int n) {
  std::vector<bool> out;
  for (size_t t = 0; t < raw.size(); ++t) {
    int positives = 0;
    for (size_t i = t + 1 > static_cast<size_t>(n) ? t + 1 - n : 0; i <= t; ++i) {
      positives += raw[i].positive;
    }
    out.push_back(2 * positives > n);
  }
  return out;
}

inline std::vector<Raw> Decode(int code, int length, const std::vector<Raw>& tiers) {
  std::vector<Raw> seq;
  const int base = static_cast<int>(tiers.size());
  for (int i = 0; i < length; ++i) {
    seq.push_back(tiers[code % base]);
    code /= base;
  }
  return seq;
}

inline int Power(int base, int exp) {
  int p = 1;
  while (exp--) p *= base;
  return p;
}

struct ExhaustiveResult {
  int sequences = 0;  // Compared before the first mismatch, if any.
  std::optional<std::string> mismatch;
};

// Checks the incremental smoother and the batch Smooth over every prefix of
// every sequence of `length` tiers.
inline ExhaustiveResult CompareExhaustively(const SmoothingConfig& cfg,
                                            const std::vector<Raw>& tiers,
                                            int length) {
  const int total = Power(static_cast<int>(tiers.size()), length);
  for (int code = 0; code < total; ++code) {
    const std::vector<Raw> raw = Decode(code, length, tiers);
    const std::vector<bool> want =
        cfg.policy == SmoothingPolicy::kMajority
            ? ReferenceMajority(raw, cfg.window)
            : ReferenceHysteresis(raw, cfg);
    TemporalSmoother smoother(cfg);
    std::vector<Decision> history;
    for (int t = 0; t < length; ++t) {
      Decision d;
      d.index = t;
      d.raw_positive = raw[t].positive;
      d.confidence = raw[t].confidence;
      history.push_back(d);
      const bool got = smoother.Push(d);
      if (got != want[t] || Smooth(history, cfg) != want[t]) {
        return {code, "sequence " + std::to_string(code) + " step " +
                          std::to_string(t)};
      }
    }
  }
  return {total, std::nullopt};
}

// Negative, positive below the bypass, positive above the bypass.
inline const std::vector<Raw> kTiers = {{false, 0.0}, {true, 0.75}, {true, 0.97}};

}  // namespace twinguard::testing

#endif  // TWINGUARD_TESTS_SMOOTHING_REFERENCE_H_
