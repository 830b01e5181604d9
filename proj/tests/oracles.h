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

// Brute-force reference formulas, written independently of the library in
// extended precision and in the most literal form.

#ifndef TWINGUARD_TESTS_ORACLES_H_
#define TWINGUARD_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace twinguard::oracle {

inline long double Mean(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += v;
  return s / static_cast<long double>(x.size());
}

// Closed-form least squares: sum((t - tbar)(x - xbar)) / sum((t - tbar)^2).
inline double Slope(const std::vector<double>& x) {
  const size_t n = x.size();
  long double tbar = 0;
  for (size_t t = 0; t < n; ++t) tbar += t;
  tbar /= n;
  const long double xbar = Mean(x);
  long double num = 0, den = 0;
  for (size_t t = 0; t < n; ++t) {
    num += (t - tbar) * (x[t] - xbar);
    den += (t - tbar) * (t - tbar);
  }
  return static_cast<double>(num / den);
}

inline double PopulationStd(const std::vector<double>& x) {
  const long double m = Mean(x);
  long double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return static_cast<double>(std::sqrt(ss / x.size()));
}

// Std of x minus its fitted line a + b t.
inline double ResidualStd(const std::vector<double>& x) {
  const size_t n = x.size();
  const long double b = Slope(x);
  long double tbar = 0;
  for (size_t t = 0; t < n; ++t) tbar += t;
  tbar /= n;
  const long double a = Mean(x) - b * tbar;
  long double ss = 0;
  for (size_t t = 0; t < n; ++t) {
    const long double r = x[t] - (a + b * t);
    ss += r * r;
  }
  return static_cast<double>(std::sqrt(ss / n));
}

inline double Range(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  return x.back() - x.front();
}

// Fraction of adjacent pairs whose absolute difference satisfies `pred`.
template <typename Pred>
inline double PairFraction(const std::vector<double>& x, Pred pred) {
  size_t hits = 0;
  for (size_t i = 1; i < x.size(); ++i) {
    if (pred(std::fabs(x[i] - x[i - 1]))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.size() - 1);
}

inline double Flatness(const std::vector<double>& x, double eps) {
  return PairFraction(x, [eps](double d) { return d < eps; });
}

inline double Freeze(const std::vector<double>& x, double tol = 1e-9) {
  return PairFraction(x, [tol](double d) { return d <= tol; });
}

inline int Toggles(const std::vector<int>& s) {
  int n = 0;
  for (size_t i = 0; i + 1 < s.size(); ++i) n += s[i] != s[i + 1];
  return n;
}

}  // namespace twinguard::oracle

#endif  // TWINGUARD_TESTS_ORACLES_H_
