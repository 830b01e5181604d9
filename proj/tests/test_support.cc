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

#include "test_support.h"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace twinguard::testing {

using json = nlohmann::json;

const std::vector<TelemetryRecord>& Seed42() {
  static const auto* records =
      new std::vector<TelemetryRecord>(GenerateDataset(42, 1500));
  return *records;
}

const std::vector<TelemetryRecord>& Seed42Benign() {
  static const auto* records = [] {
    GeneratorOptions opts;
    opts.inject_attacks = false;
    return new std::vector<TelemetryRecord>(GenerateDataset(opts));
  }();
  return *records;
}

Window MakeWindow(int64_t end_index, std::vector<double> lit,
                  std::vector<double> fit, std::vector<double> ait,
                  std::vector<int> mv, std::vector<int> p101) {
  const size_t n = lit.size();
  if (fit.size() != n || ait.size() != n || mv.size() != n ||
      p101.size() != n) {
    throw std::invalid_argument("MakeWindow: ragged series");
  }
  Window w;
  w.end_index = end_index;
  w.length = static_cast<int>(n);
  w.sensors = {std::move(lit), std::move(fit), std::move(ait)};
  w.actuators = {std::move(mv), std::move(p101)};
  w.labels.assign(n, Scenario::kBenign);
  return w;
}

Window FlatWindow(int64_t end_index, int length) {
  const auto n = static_cast<size_t>(length);
  return MakeWindow(end_index, std::vector<double>(n, 0.5),
                    std::vector<double>(n, 0.5), std::vector<double>(n, 0.5),
                    std::vector<int>(n, kActuatorClosed),
                    std::vector<int>(n, kActuatorClosed));
}

std::vector<double> RandomSeries(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> step(0.0, 0.02);
  std::vector<double> x(n);
  x[0] = u(rng);
  for (int i = 1; i < n; ++i) {
    const double r = u(rng);
    if (r < 0.25) {
      x[i] = x[i - 1];
    } else if (r < 0.4) {
      x[i] = x[i - 1] + (u(rng) - 0.5) * 1.8e-3;
    } else {
      x[i] = x[i - 1] + step(rng);
    }
  }
  return x;
}

std::vector<int> RandomStates(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> state(0, 2);
  std::bernoulli_distribution keep(0.6);
  std::vector<int> s(n);
  s[0] = state(rng);
  for (int i = 1; i < n; ++i) s[i] = keep(rng) ? s[i - 1] : state(rng);
  return s;
}

FeatureVector QuietFeatures() {
  FeatureVector fv;
  for (SensorFeatures& s : fv.sensors) {
    s.std = 0.01;
    s.detrended_std = 0.01;
    s.range = 0.02;
    s.flatness_ratio = 0.1;
  }
  fv.window_end_index = 400;
  fv.window_length = 30;
  fv.history_len = 1000;
  fv.history_variance = 0.01;
  return fv;
}

std::filesystem::path TestDataDir() { return TWINGUARD_TEST_DATA_DIR; }

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("twinguard_test_" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

int64_t ResidentKb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      return std::stoll(line.substr(6));
    }
  }
  return -1;
}

class StubChatServer::Impl {
 public:
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

StubChatServer::StubChatServer(Handler handler)
    : impl_(std::make_unique<Impl>()) {
  impl_->server.Post(
      "/v1/chat/completions",
      [this, handler](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        {
          std::lock_guard<std::mutex> lock(mu_);
          last_authorization_ = req.get_header_value("Authorization");
        }
        std::string prompt;
        try {
          const json body = json::parse(req.body);
          for (const json& m : body.at("messages")) {
            if (m.at("role") == "user") prompt = m.at("content");
          }
        } catch (const json::exception&) {
          res.status = 400;
          return;
        }
        const StubResponse r = handler(prompt);
        if (r.delay_s > 0) {
          std::this_thread::sleep_for(std::chrono::duration<double>(r.delay_s));
        }
        res.status = r.status;
        if (!r.retry_after.empty()) res.set_header("Retry-After", r.retry_after);
        res.set_content(r.body, "application/json");
      });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw std::runtime_error("stub server bind failed");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubChatServer::~StubChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubChatServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1";
}

std::string StubChatServer::last_authorization() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_authorization_;
}

std::string StubChatServer::Envelope(const std::string& content) {
  const json reply = {
      {"id", "stub"},
      {"object", "chat.completion"},
      {"choices",
       json::array({{{"index", 0},
                     {"message", {{"role", "assistant"}, {"content", content}}},
                     {"finish_reason", "stop"}}})}};
  return reply.dump();
}

std::unique_ptr<StubChatServer> MockBehindHttp() {
  auto mock = std::make_shared<MockLlmBackend>();
  auto mu = std::make_shared<std::mutex>();
  return std::make_unique<StubChatServer>(
      [mock, mu](const std::string& prompt) {
        std::lock_guard<std::mutex> lock(*mu);
        return StubResponse{200, StubChatServer::Envelope(mock->Complete(prompt))};
      });
}

LlmBackendConfig HttpConfig(const std::string& base_url) {
  LlmBackendConfig cfg;
  cfg.backend = "http";
  cfg.base_url = base_url;
  cfg.timeout_s = 5.0;
  cfg.max_retries = 2;
  cfg.backoff_initial_s = 0.01;
  cfg.backoff_max_s = 0.05;
  cfg.api_key_env = "TWINGUARD_TEST_API_KEY";
  return cfg;
}

}  // namespace twinguard::testing
