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

#include "twinguard/iforest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;
using Code = IForestError::Code;

constexpr std::string_view kFormatTag = "twinguard-iforest";
constexpr int kFormatVersion = 1;

class TreeBuilder {
 public:
  TreeBuilder(std::span<const std::vector<double>> rows, int max_depth,
              std::mt19937_64& rng)
      : rows_(rows), max_depth_(max_depth), rng_(rng) {}

  IsolationForest::Tree Build(std::vector<int> sample) {
    tree_.clear();
    Grow(sample, 0);
    return std::move(tree_);
  }

 private:
  double Unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  int Grow(std::span<int> sample, int depth) {
    const int id = static_cast<int>(tree_.size());
    tree_.push_back({});
    tree_[id].size = static_cast<int>(sample.size());
    tree_[id].depth = depth;
    if (depth >= max_depth_ || sample.size() <= 1) return id;

    // Only features that still vary inside the node can split it.
    const int dims = static_cast<int>(rows_[sample[0]].size());
    std::vector<int> candidates;
    std::vector<std::pair<double, double>> bounds(dims);
    for (int f = 0; f < dims; ++f) {
      double lo = rows_[sample[0]][f];
      double hi = lo;
      for (const int i : sample) {
        lo = std::min(lo, rows_[i][f]);
        hi = std::max(hi, rows_[i][f]);
      }
      bounds[f] = {lo, hi};
      if (hi > lo) candidates.push_back(f);
    }
    if (candidates.empty()) return id;

    const int feature = candidates[rng_() % candidates.size()];
    const auto [lo, hi] = bounds[feature];
    // Split in (lo, hi]: `x < split` then sends lo left and hi right even
    // when no double lies strictly between them.
    double split = lo + (hi - lo) * Unit();
    if (!(split > lo)) split = hi;

    const auto mid = std::partition(sample.begin(), sample.end(), [&](int i) {
      return rows_[i][feature] < split;
    });
    const size_t n_left = static_cast<size_t>(mid - sample.begin());
    const int left = Grow(sample.subspan(0, n_left), depth + 1);
    const int right = Grow(sample.subspan(n_left), depth + 1);
    tree_[id].feature = feature;
    tree_[id].split = split;
    tree_[id].left = left;
    tree_[id].right = right;
    return id;
  }

  std::span<const std::vector<double>> rows_;
  int max_depth_;
  std::mt19937_64& rng_;
  IsolationForest::Tree tree_;
};

double PathLength(const IsolationForest::Tree& tree, std::span<const double> x) {
  int node = 0;
  while (tree[node].feature >= 0) {
    node = x[tree[node].feature] < tree[node].split ? tree[node].left
                                                    : tree[node].right;
  }
  return tree[node].depth + AveragePathLength(tree[node].size);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IForestError(Code::kFormat, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw IForestError(Code::kFormat, "cannot write " + path.string());
}

json ModelDocument(const IsolationForest& model) {
  json ranges = json::array();
  for (const auto& [lo, hi] : model.feature_ranges()) {
    ranges.push_back({lo, hi});
  }
  json trees = json::array();
  for (const IsolationForest::Tree& tree : model.trees()) {
    json nodes = json::array();
    for (const IsolationForest::Node& n : tree) {
      nodes.push_back({n.feature, n.split, n.left, n.right, n.size, n.depth});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", kFormatTag},
          {"version", kFormatVersion},
          {"psi", model.subsample()},
          {"dimensions", model.dimensions()},
          {"max_depth", model.max_depth()},
          {"feature_names", IForestFeatureNames()},
          {"feature_ranges", ranges},
          {"trees", trees}};
}

}  // namespace

double HarmonicApprox(double i) { return std::log(i) + kEulerGamma; }

double AveragePathLength(int64_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const auto m = static_cast<double>(n);
  return 2.0 * HarmonicApprox(m - 1.0) - 2.0 * (m - 1.0) / m;
}

double AnomalyScore(double mean_path, int64_t psi) {
  const double c = AveragePathLength(psi);
  if (c <= 0.0) return 0.5;
  return std::exp2(-mean_path / c);
}

std::vector<double> IForestFeatures(const FeatureVector& fv) {
  std::vector<double> out;
  out.reserve(kIForestFeatureCount);
  for (const SensorFeatures& f : fv.sensors) {
    out.insert(out.end(), {f.slope, f.std, f.range, f.freeze_ratio});
  }
  for (const ActuatorFeatures& a : fv.actuators) {
    out.push_back(static_cast<double>(a.toggle_count));
  }
  return out;
}

std::vector<std::string> IForestFeatureNames() {
  std::vector<std::string> names;
  for (const Tag tag : kSensorTags) {
    for (const char* f : {"slope", "std", "range", "freeze_ratio"}) {
      names.push_back(std::string(TagName(tag)) + "." + f);
    }
  }
  for (const Tag tag : kActuatorTags) {
    names.push_back(std::string(TagName(tag)) + ".toggle_count");
  }
  return names;
}

IsolationForest IsolationForest::Fit(std::span<const std::vector<double>> rows,
                                     const IForestConfig& config) {
  if (rows.empty()) {
    throw IForestError(Code::kEmptyTrainingSet, "no training rows");
  }
  if (config.n_trees < 1 || config.subsample < 1) {
    throw std::invalid_argument("n_trees and subsample must be positive");
  }
  const size_t dims = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != dims || dims == 0) {
      throw IForestError(Code::kDimensionMismatch,
                         "training rows must share a non-zero width");
    }
  }

  IsolationForest model;
  model.dims_ = static_cast<int>(dims);
  model.psi_ = static_cast<int>(
      std::min<size_t>(static_cast<size_t>(config.subsample), rows.size()));
  model.max_depth_ =
      model.psi_ <= 1
          ? 0
          : static_cast<int>(std::ceil(std::log2(static_cast<double>(model.psi_))));
  model.ranges_.assign(dims, {rows[0][0], rows[0][0]});
  for (size_t f = 0; f < dims; ++f) {
    double lo = rows[0][f];
    double hi = lo;
    for (const auto& row : rows) {
      lo = std::min(lo, row[f]);
      hi = std::max(hi, row[f]);
    }
    model.ranges_[f] = {lo, hi};
  }

  std::mt19937_64 rng(config.seed);
  TreeBuilder builder(rows, model.max_depth_, rng);
  std::vector<int> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  model.trees_.reserve(config.n_trees);
  for (int t = 0; t < config.n_trees; ++t) {
    // Partial Fisher-Yates: the first psi entries become the subsample.
    for (int k = 0; k < model.psi_; ++k) {
      const size_t j = k + rng() % (all.size() - k);
      std::swap(all[k], all[j]);
    }
    model.trees_.push_back(builder.Build(
        std::vector<int>(all.begin(), all.begin() + model.psi_)));
  }
  return model;
}

double IsolationForest::MeanPathLength(std::span<const double> x) const {
  if (!trained()) throw IForestError(Code::kNotTrained, "model not trained");
  if (static_cast<int>(x.size()) != dims_) {
    throw IForestError(Code::kDimensionMismatch,
                       "expected " + std::to_string(dims_) + " features, got " +
                           std::to_string(x.size()));
  }
  double total = 0.0;
  for (const Tree& tree : trees_) total += PathLength(tree, x);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::Score(std::span<const double> x) const {
  return AnomalyScore(MeanPathLength(x), psi_);
}

std::string IsolationForest::ToJson() const {
  return ModelDocument(*this).dump() + "\n";
}

IsolationForest IsolationForest::FromJson(std::string_view text) {
  IsolationForest model;
  try {
    json doc = json::parse(text);
    if (doc.contains("model")) doc = doc.at("model");
    if (doc.at("format").get<std::string>() != kFormatTag ||
        doc.at("version").get<int>() != kFormatVersion) {
      throw IForestError(Code::kFormat, "not a twinguard-iforest v1 document");
    }
    model.psi_ = doc.at("psi").get<int>();
    model.dims_ = doc.at("dimensions").get<int>();
    model.max_depth_ = doc.at("max_depth").get<int>();
    for (const json& r : doc.at("feature_ranges")) {
      model.ranges_.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    }
    for (const json& nodes : doc.at("trees")) {
      Tree tree;
      for (const json& n : nodes) {
        tree.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                        n.at(2).get<int>(), n.at(3).get<int>(),
                        n.at(4).get<int>(), n.at(5).get<int>()});
      }
      for (const Node& n : tree) {
        const int count = static_cast<int>(tree.size());
        if (n.feature >= model.dims_ ||
            (n.feature >= 0 && (n.left <= 0 || n.left >= count ||
                                n.right <= 0 || n.right >= count))) {
          throw IForestError(Code::kFormat, "corrupt tree node");
        }
      }
      if (tree.empty()) throw IForestError(Code::kFormat, "empty tree");
      model.trees_.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    throw IForestError(Code::kFormat, std::string("bad model: ") + e.what());
  }
  return model;
}

double QuantileThreshold(std::vector<double> scores, double q) {
  if (scores.empty()) {
    throw IForestError(Code::kEmptyTrainingSet, "no scores to calibrate on");
  }
  q = std::clamp(q, 0.0, 1.0);
  std::sort(scores.begin(), scores.end());
  // The tolerance keeps products such as 0.99 * 100 from rounding up a rank.
  const auto n = static_cast<double>(scores.size());
  const auto rank = static_cast<size_t>(std::ceil(q * n - 1e-9));
  return scores[std::clamp<size_t>(rank, 1, scores.size()) - 1];
}

double IForestDetector::ScoreWindow(const Window& window) const {
  const FeatureVector fv = ExtractFeatures(window, 0, 0.0, features);
  return model.Score(IForestFeatures(fv));
}

bool IForestDetector::PredictWindow(const Window& window) const {
  return ScoreWindow(window) > threshold;
}

std::string IForestDetector::ToJson() const {
  json doc = ModelDocument(model);
  doc["threshold"] = threshold;
  doc["window_length"] = window_length;
  doc["epsilon_flat"] = features.epsilon_flat;
  return doc.dump() + "\n";
}

IForestDetector IForestDetector::FromJson(std::string_view text) {
  IForestDetector d;
  d.model = IsolationForest::FromJson(text);
  try {
    const json doc = json::parse(text);
    d.threshold = doc.value("threshold", kDefaultIForestThreshold);
    d.window_length = doc.value("window_length", kIForestWindow);
    d.features.epsilon_flat = doc.value("epsilon_flat", 1e-3);
  } catch (const json::exception& e) {
    throw IForestError(Code::kFormat, std::string("bad model: ") + e.what());
  }
  return d;
}

void IForestDetector::Save(const std::filesystem::path& path) const {
  WriteFile(path, ToJson());
}

IForestDetector IForestDetector::Load(const std::filesystem::path& path) {
  return FromJson(ReadFile(path));
}

IForestDetector TrainIForestDetector(std::span<const TelemetryRecord> records,
                                     const IForestTrainingOptions& options,
                                     int window_length) {
  IForestDetector detector;
  detector.window_length = window_length;
  const int64_t first = std::max<int64_t>(options.first_end, window_length - 1);
  const int64_t last =
      std::min<int64_t>(options.last_end, static_cast<int64_t>(records.size()) - 1);
  std::vector<std::vector<double>> rows;
  for (int64_t end = first; end <= last; ++end) {
    const Window w = SliceWindow(records, end, window_length);
    rows.push_back(IForestFeatures(ExtractFeatures(w, 0, 0.0, detector.features)));
  }
  detector.model = IsolationForest::Fit(rows, options.forest);
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (const auto& row : rows) scores.push_back(detector.model.Score(row));
  detector.threshold = QuantileThreshold(std::move(scores), options.quantile);
  return detector;
}

}  // namespace twinguard
