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

// Runs the twinguard binary as a subprocess.

#include <signal.h>
#include <spawn.h>
#include <stdio.h>
#include <sys/wait.h>
#include <unistd.h>

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_support.h"
#include "twinguard/evaluator.h"
#include "twinguard/iforest.h"
#include "twinguard/replay_service.h"
#include "twinguard/telemetry.h"

extern char** environ;

namespace twinguard {
namespace {

using json = nlohmann::json;

struct Result {
  int exit_code = -1;
  std::string out;
};

std::string Quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result Cli(const std::vector<std::string>& args) {
  std::string cmd = Quote(TWINGUARD_CLI);
  for (const std::string& a : args) cmd += " " + Quote(a);
  cmd += " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Golden() {
  return testing::ReadFile(testing::TestDataDir() / "golden" /
                           "seed42_hybrid_table.txt");
}

TEST(CliTest, GenDataWritesCsvAndMetadata) {
  testing::TempDir dir;
  const auto csv = dir / "seed42.csv";
  ASSERT_EQ(Cli({"gen-data", "--seed", "42", "--rows", "1500", "-o",
                 csv.string()})
                .exit_code,
            0);
  EXPECT_EQ(ParseCsv(csv), GenerateDataset(42, 1500));
  const auto meta = json::parse(testing::ReadFile(dir / "seed42.meta.json"));
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_EQ(LoadIntervals(dir / "seed42.meta.json"), DefaultScenarioIntervals());
}

TEST(CliTest, DetectPrintsTheGoldenTable) {
  testing::TempDir dir;
  const Result r = Cli({"detect", "--seed", "42", "--trace",
                        (dir / "trace.jsonl").string(), "--report",
                        (dir / "report.json").string()});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, Golden());
  const EvalReport report =
      EvalReport::FromJson(testing::ReadFile(dir / "report.json"));
  EXPECT_EQ(report.fp_count, 0);
  EXPECT_EQ(ReadTraceFile(dir / "trace.jsonl").size(), 1371u);

  // evaluate re-scores the trace to the same table.
  const Result again = Cli({"evaluate", "--trace", (dir / "trace.jsonl").string(),
                            "--truth", (testing::TestDataDir() / "golden" /
                                        "seed42_intervals.json")
                                           .string()});
  ASSERT_EQ(again.exit_code, 0);
  EXPECT_EQ(again.out, Golden());
}

TEST(CliTest, DetectFromCsvMatchesGenerated) {
  testing::TempDir dir;
  const auto csv = dir / "d.csv";
  ASSERT_EQ(Cli({"gen-data", "-o", csv.string()}).exit_code, 0);
  const Result r = Cli({"detect", "--data", csv.string(), "--trace",
                        (dir / "t.jsonl").string()});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, Golden());
}

TEST(CliTest, HeuristicOverridesAreApplied) {
  testing::TempDir dir;
  // A freeze rule that needs 5000 windows of history never fires.
  const Result r = Cli({"detect", "--dos-min-history", "5000", "--trace",
                        (dir / "t.jsonl").string()});
  ASSERT_EQ(r.exit_code, 0);
  for (const Decision& d : ReadTraceFile(dir / "t.jsonl")) {
    if (d.source == DecisionSource::kHeuristic) {
      EXPECT_NE(d.scenario_guess, Scenario::kFreezeDos);
    }
  }
}

TEST(CliTest, ExitCodes) {
  EXPECT_NE(Cli({}).exit_code, 0);
  EXPECT_NE(Cli({"detect", "--no-such-flag"}).exit_code, 0);
  EXPECT_NE(Cli({"gen-data"}).exit_code, 0);  // -o is required.
  EXPECT_NE(Cli({"detect", "--llm-backend", "carrier-pigeon"}).exit_code, 0);
  EXPECT_EQ(Cli({"detect", "--data", "/nonexistent.csv"}).exit_code, 1);

  int dead_port = 0;
  {
    ReplayService svc;
    svc.Load(testing::Seed42());
    dead_port = svc.Start("127.0.0.1", 0);
  }
  testing::TempDir dir;
  EXPECT_EQ(Cli({"detect", "--replay", "http", "--replay-url",
                 "http://127.0.0.1:" + std::to_string(dead_port),
                 "--replay-timeout", "1", "--trace", (dir / "t.jsonl").string()})
                .exit_code,
            3);
}

TEST(CliTest, IForestFitAndScore) {
  testing::TempDir dir;
  const auto model = dir / "iforest.json";
  ASSERT_EQ(Cli({"iforest", "fit", "-o", model.string()}).exit_code, 0);
  const IForestDetector det = IForestDetector::Load(model);
  EXPECT_EQ(det.model.trees().size(), 100u);
  const Result r = Cli({"iforest", "score", "--model", model.string(),
                        "--trace", (dir / "if.jsonl").string(), "--report",
                        (dir / "if.json").string()});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("Isolation Forest"), std::string::npos);
  const EvalReport rep = EvalReport::FromJson(testing::ReadFile(dir / "if.json"));
  EXPECT_EQ(rep.windows_evaluated, 1371);
}

// `serve` in a child process, then `detect --replay http` against it.
TEST(CliTest, ServeAndDetectOverHttp) {
  testing::TempDir dir;
  const auto csv = dir / "d.csv";
  ASSERT_EQ(Cli({"gen-data", "-o", csv.string()}).exit_code, 0);

  int out_pipe[2];
  ASSERT_EQ(::pipe(out_pipe), 0);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  const std::string bin = TWINGUARD_CLI;
  std::vector<std::string> args = {bin,        "serve",  "--data", csv.string(),
                                   "--port",   "0",      "--strict-order"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  ASSERT_EQ(::posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(),
                          environ),
            0);
  posix_spawn_file_actions_destroy(&actions);
  ::close(out_pipe[1]);

  std::string banner;
  char c;
  while (::read(out_pipe[0], &c, 1) == 1 && c != '\n') banner += c;
  ::close(out_pipe[0]);
  const size_t at = banner.find("http://");
  ASSERT_NE(at, std::string::npos) << banner;
  const std::string url = banner.substr(at);

  const Result r = Cli({"detect", "--replay", "http", "--replay-url", url,
                        "--data", csv.string(), "--trace",
                        (dir / "t.jsonl").string()});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, Golden());

  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace twinguard
