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

// twinguard: data generation, replay serving, detection, baseline and
// evaluation from one binary.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "twinguard/evaluator.h"
#include "twinguard/heuristics.h"
#include "twinguard/iforest.h"
#include "twinguard/llm_backend.h"
#include "twinguard/orchestrator.h"
#include "twinguard/replay_service.h"
#include "twinguard/telemetry.h"

namespace twinguard {
namespace {

namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitUnreachable = 3;

std::atomic<bool> g_stop{false};

extern "C" void OnSignal(int) { g_stop = true; }

std::string FlagName(std::string_view key) {
  std::string flag(key);
  std::replace(flag.begin(), flag.end(), '_', '-');
  return "--" + flag;
}

fs::path MetadataPath(const fs::path& csv) {
  fs::path meta = csv;
  meta.replace_extension(".meta.json");
  return meta;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Dataset options shared by every subcommand that reads telemetry.
struct DataOptions {
  std::string data;
  uint64_t seed = 42;
  int64_t rows = 1500;

  void Register(CLI::App* cmd) {
    cmd->add_option("--data", data, "Telemetry CSV (generated when omitted)");
    cmd->add_option("--seed", seed, "Generator seed when --data is omitted")
        ->capture_default_str();
    cmd->add_option("--rows", rows, "Generated rows when --data is omitted")
        ->capture_default_str();
  }

  std::vector<TelemetryRecord> Load() const {
    if (!data.empty()) return ParseCsv(fs::path(data));
    return GenerateDataset(seed, rows);
  }
};

// Ground truth: an explicit file, otherwise the dataset's own labels.
std::vector<GroundTruthInterval> ResolveTruth(
    const std::string& truth_path,
    const std::vector<TelemetryRecord>* records) {
  if (!truth_path.empty()) return LoadIntervals(fs::path(truth_path));
  if (records) return IntervalsFromLabels(*records);
  return DefaultScenarioIntervals();
}

void EmitReport(const EvalReport& report, const std::string& report_path,
                std::string_view system_name) {
  if (!report_path.empty()) WriteText(report_path, report.ToJson());
  std::cout << report.ToTable(system_name);
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  GeneratorOptions gen;
  bool benign_only = false;
  std::string out;
};

void AddGenData(CLI::App& app, GenDataArgs& a) {
  CLI::App* cmd = app.add_subcommand("gen-data", "Generate a labeled dataset");
  cmd->add_option("--seed", a.gen.seed)->capture_default_str();
  cmd->add_option("--rows", a.gen.rows, "At least 1400")->capture_default_str();
  cmd->add_option("-o,--out", a.out, "Output CSV")->required();
  cmd->add_flag("--benign-only", a.benign_only, "Skip attack injection");
}

int RunGenData(GenDataArgs& a) {
  a.gen.inject_attacks = !a.benign_only;
  const auto records = GenerateDataset(a.gen);
  WriteCsvFile(a.out, records);
  const fs::path meta = MetadataPath(a.out);
  WriteText(meta, MetadataFor(a.gen, records).ToJson());
  std::cerr << "wrote " << records.size() << " rows to " << a.out << " ("
            << meta.string() << ")\n";
  return 0;
}

// ------------------------------------------------------------------- serve

struct ServeArgs {
  std::string data;
  std::string host = "127.0.0.1";
  int port = 8099;
  int window = 30;
  bool strict_order = false;
};

void AddServe(CLI::App& app, ServeArgs& a) {
  CLI::App* cmd = app.add_subcommand("serve", "Serve windows over HTTP");
  cmd->add_option("--data", a.data, "Telemetry CSV")->required();
  cmd->add_option("--host", a.host)->capture_default_str();
  cmd->add_option("--port", a.port, "0 picks a free port")->capture_default_str();
  cmd->add_option("--window", a.window, "Default window length")
      ->capture_default_str();
  cmd->add_flag("--strict-order", a.strict_order,
                "Reject reads that do not advance the index");
}

int RunServe(const ServeArgs& a) {
  ReplayService service(a.window);
  service.Load(ParseCsv(fs::path(a.data)));
  service.set_strict_order(a.strict_order);
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  const int port = service.Start(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.Stop();
  return 0;
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
  DataOptions data;
  RunConfig run;
  std::string replay = "embedded";
  std::string replay_url = "http://127.0.0.1:8099";
  double replay_timeout = 10.0;
  std::string trace = "trace.jsonl";
  std::string report;
  std::string truth;
  std::string heuristics_config;
  std::map<std::string, std::string> overrides;
  std::string smooth_policy = "hysteresis";
  EvalConfig eval;
};

void AddDetect(CLI::App& app, DetectArgs& a) {
  CLI::App* cmd = app.add_subcommand("detect", "Run the detection loop");
  a.data.Register(cmd);
  cmd->add_option("--replay", a.replay, "embedded or http")
      ->check(CLI::IsMember({"embedded", "http"}))
      ->capture_default_str();
  cmd->add_option("--replay-url", a.replay_url)->capture_default_str();
  cmd->add_option("--replay-timeout", a.replay_timeout, "Seconds")
      ->capture_default_str();
  cmd->add_option("--start", a.run.start)->capture_default_str();
  cmd->add_option("--end", a.run.end)->capture_default_str();
  cmd->add_option("--window", a.run.window_length)->capture_default_str();
  cmd->add_option("--trace", a.trace, "JSONL trace output")
      ->capture_default_str();
  cmd->add_option("--report", a.report, "JSON report output");
  cmd->add_option("--truth", a.truth,
                  "Ground-truth intervals (defaults to dataset labels)");
  cmd->add_option("--recent-context", a.run.recent_context)
      ->capture_default_str();

  cmd->add_option("--llm-backend", a.run.llm.backend)
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  cmd->add_option("--llm-base-url", a.run.llm.base_url)->capture_default_str();
  cmd->add_option("--llm-model", a.run.llm.model)->capture_default_str();
  cmd->add_option("--llm-timeout", a.run.llm.timeout_s, "Seconds")
      ->capture_default_str();
  cmd->add_option("--llm-retries", a.run.llm.max_retries)->capture_default_str();
  cmd->add_option("--llm-temperature", a.run.llm.temperature)
      ->capture_default_str();
  cmd->add_option("--llm-api-key-env", a.run.llm.api_key_env)
      ->capture_default_str();

  cmd->add_option("--heuristics-config", a.heuristics_config,
                  "key=value threshold file");
  for (const std::string_view key : HeuristicConfig::Keys()) {
    const std::string name(key);
    cmd->add_option_function<std::string>(
        FlagName(key),
        [&a, name](const std::string& v) { a.overrides[name] = v; },
        "Threshold override");
  }

  cmd->add_option("--smooth-policy", a.smooth_policy)
      ->check(CLI::IsMember({"hysteresis", "majority"}))
      ->capture_default_str();
  cmd->add_option("--smooth-window", a.run.smoothing.window, "N")
      ->capture_default_str();
  cmd->add_option("--smooth-on", a.run.smoothing.on_threshold, "M")
      ->capture_default_str();
  cmd->add_option("--smooth-off", a.run.smoothing.off_threshold, "K")
      ->capture_default_str();
  cmd->add_option("--smooth-bypass", a.run.smoothing.bypass_confidence)
      ->capture_default_str();
  cmd->add_option("--eval-spillover", a.eval.spillover_windows)
      ->capture_default_str();
  cmd->add_option("--eval-release", a.eval.release_grace)->capture_default_str();
}

int RunDetect(DetectArgs& a) {
  if (!a.heuristics_config.empty()) {
    a.run.heuristics = HeuristicConfig::FromKeyValueFile(a.heuristics_config);
  }
  for (const auto& [key, value] : a.overrides) {
    if (!a.run.heuristics.Set(key, value)) {
      throw std::invalid_argument("bad value for " + FlagName(key) + ": " +
                                  value);
    }
  }
  a.run.smoothing.policy = *ParseSmoothingPolicy(a.smooth_policy);
  a.run.Validate();

  std::vector<TelemetryRecord> records;
  std::unique_ptr<ReplaySource> replay;
  if (a.replay == "embedded") {
    records = a.data.Load();
    replay = std::make_unique<EmbeddedReplay>(records);
  } else {
    if (!a.data.data.empty()) records = a.data.Load();
    replay = std::make_unique<HttpReplayClient>(a.replay_url, a.replay_timeout);
  }
  const auto truth = ResolveTruth(a.truth, records.empty() ? nullptr : &records);

  std::unique_ptr<LlmBackend> backend = MakeLlmBackend(a.run.llm);
  std::ofstream trace(a.trace, std::ios::trunc);
  if (!trace) throw std::runtime_error("cannot open trace " + a.trace);
  const RunSummary s =
      RunDetector(a.run, *replay, *backend, &trace, truth, a.eval);

  EmitReport(s.report, a.report, "Hybrid DT");
  std::cerr << "windows=" << s.windows
            << " heuristic_positives=" << s.heuristic_positives
            << " llm_queries=" << s.llm_queries
            << " llm_accepted=" << s.llm_accepted
            << " llm_positives=" << s.llm_positives
            << " schema_violations=" << s.llm_schema_violations
            << " implausible=" << s.llm_implausible
            << " unavailable=" << s.llm_unavailable
            << " elapsed_s=" << s.elapsed_s << "\n";
  return 0;
}

// ----------------------------------------------------------------- iforest

struct IForestArgs {
  // fit
  DataOptions train;
  bool train_attack_free = true;
  IForestTrainingOptions opts;
  int window = kIForestWindow;
  std::string model_out = "iforest.json";
  // score
  DataOptions data;
  std::string model;
  int64_t start = 29;
  int64_t end = 1399;
  std::string trace = "iforest_trace.jsonl";
  std::string report;
  std::string truth;
};

void AddIForest(CLI::App& app, IForestArgs& a, CLI::App** fit,
                CLI::App** score) {
  CLI::App* cmd =
      app.add_subcommand("iforest", "Isolation Forest baseline");
  cmd->require_subcommand(1);

  *fit = cmd->add_subcommand("fit", "Train and calibrate a model");
  (*fit)->add_option("--data", a.train.data,
                     "Training CSV (generated attack-free when omitted)");
  (*fit)->add_option("--seed", a.train.seed)->capture_default_str();
  (*fit)->add_option("--rows", a.train.rows)->capture_default_str();
  (*fit)->add_option("--first-end", a.opts.first_end)->capture_default_str();
  (*fit)->add_option("--last-end", a.opts.last_end)->capture_default_str();
  (*fit)->add_option("--quantile", a.opts.quantile)->capture_default_str();
  (*fit)->add_option("--trees", a.opts.forest.n_trees)->capture_default_str();
  (*fit)->add_option("--subsample", a.opts.forest.subsample)
      ->capture_default_str();
  (*fit)->add_option("--forest-seed", a.opts.forest.seed)
      ->capture_default_str();
  (*fit)->add_option("--window", a.window)->capture_default_str();
  (*fit)->add_option("-o,--out", a.model_out)->capture_default_str();

  *score = cmd->add_subcommand("score", "Run the baseline over a dataset");
  a.data.Register(*score);
  (*score)->add_option("--model", a.model, "Model JSON")->required();
  (*score)->add_option("--start", a.start)->capture_default_str();
  (*score)->add_option("--end", a.end)->capture_default_str();
  (*score)->add_option("--trace", a.trace)->capture_default_str();
  (*score)->add_option("--report", a.report, "JSON report output");
  (*score)->add_option("--truth", a.truth,
                       "Ground-truth intervals (defaults to dataset labels)");
}

int RunIForestFit(IForestArgs& a) {
  std::vector<TelemetryRecord> records;
  if (!a.train.data.empty()) {
    records = ParseCsv(fs::path(a.train.data));
  } else {
    GeneratorOptions g;
    g.seed = a.train.seed;
    g.rows = a.train.rows;
    g.inject_attacks = false;
    records = GenerateDataset(g);
  }
  const IForestDetector det = TrainIForestDetector(records, a.opts, a.window);
  det.Save(a.model_out);
  std::cerr << "trained " << det.model.trees().size() << " trees, threshold "
            << det.threshold << " -> " << a.model_out << "\n";
  return 0;
}

int RunIForestScore(IForestArgs& a) {
  const IForestDetector det = IForestDetector::Load(a.model);
  const auto records = a.data.Load();
  const auto truth = ResolveTruth(a.truth, &records);
  EmbeddedReplay replay(records);
  std::ofstream trace(a.trace, std::ios::trunc);
  if (!trace) throw std::runtime_error("cannot open trace " + a.trace);
  const RunSummary s =
      RunIForestBaseline(det, replay, a.start, a.end, &trace, truth);
  EmitReport(s.report, a.report, "Isolation Forest");
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string trace;
  std::string truth;
  std::string report;
  std::string system_name = "Hybrid DT";
  EvalConfig eval;
};

void AddEvaluate(CLI::App& app, EvaluateArgs& a) {
  CLI::App* cmd =
      app.add_subcommand("evaluate", "Score a decision trace against truth");
  cmd->add_option("--trace", a.trace, "JSONL trace")->required();
  cmd->add_option("--truth", a.truth, "Ground-truth intervals")->required();
  cmd->add_option("--report", a.report, "JSON report output");
  cmd->add_option("--system-name", a.system_name)->capture_default_str();
  cmd->add_option("--spillover", a.eval.spillover_windows)
      ->capture_default_str();
  cmd->add_option("--release", a.eval.release_grace)->capture_default_str();
}

int RunEvaluate(const EvaluateArgs& a) {
  const auto decisions = ReadTraceFile(a.trace);
  const auto truth = LoadIntervals(a.truth);
  const EvalReport report = Evaluate(decisions, truth, a.eval);
  if (!a.report.empty()) WriteText(a.report, report.ToJson());
  std::cout << report.ToTable(a.system_name);
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"TwinGuard ICS anomaly detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "twinguard 0.1.0");

  GenDataArgs gen;
  ServeArgs serve;
  DetectArgs detect;
  IForestArgs iforest;
  EvaluateArgs evaluate;
  CLI::App* fit = nullptr;
  CLI::App* score = nullptr;
  AddGenData(app, gen);
  AddServe(app, serve);
  AddDetect(app, detect);
  AddIForest(app, iforest, &fit, &score);
  AddEvaluate(app, evaluate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen-data")) return RunGenData(gen);
    if (app.got_subcommand("serve")) return RunServe(serve);
    if (app.got_subcommand("detect")) return RunDetect(detect);
    if (fit->parsed()) return RunIForestFit(iforest);
    if (score->parsed()) return RunIForestScore(iforest);
    if (app.got_subcommand("evaluate")) return RunEvaluate(evaluate);
  } catch (const ReplayError& e) {
    std::cerr << "error: replay: " << e.what() << "\n";
    return e.unreachable() ? kExitUnreachable : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace
}  // namespace twinguard

int main(int argc, char** argv) { return twinguard::Main(argc, argv); }
