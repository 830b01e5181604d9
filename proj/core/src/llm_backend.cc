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

#include "twinguard/llm_backend.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;
using Reason = LlmUnavailable::Reason;

constexpr std::string_view kFeaturesMarker = "FEATURES_JSON: ";

constexpr std::string_view kSystemPrompt =
    "You analyze industrial control system telemetry for cyber attacks. "
    "Answer with a single JSON object that follows the requested schema.";

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // Prefix without trailing slash, e.g. "/v1".
};

Endpoint SplitUrl(const std::string& url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url needs a scheme: " + url);
  }
  const size_t path_begin = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_begin);
  ep.path = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  return ep;
}

// Facts the mock rules condition on.
struct Fingerprint {
  double lit101_slope = 0.0;
  double max_freeze_ratio = 0.0;
  int mv101_toggles = 0;
};

Fingerprint ReadFingerprint(const json& doc) {
  Fingerprint fp;
  const json& sensors = doc.at("sensors");
  fp.lit101_slope = sensors.at("LIT101").at("slope").get<double>();
  for (const auto& [tag, f] : sensors.items()) {
    fp.max_freeze_ratio =
        std::max(fp.max_freeze_ratio, f.at("freeze_ratio").get<double>());
  }
  fp.mv101_toggles =
      doc.at("actuators").at("MV101").at("toggle_count").get<int>();
  return fp;
}

bool Matches(const json& when, const Fingerprint& fp) {
  for (const auto& [key, bound] : when.items()) {
    const double b = bound.get<double>();
    if (key == "max_freeze_ratio_min") {
      if (!(fp.max_freeze_ratio >= b)) return false;
    } else if (key == "mv101_toggles_min") {
      if (!(fp.mv101_toggles >= b)) return false;
    } else if (key == "lit101_slope_min") {
      if (!(fp.lit101_slope >= b)) return false;
    } else {
      throw std::invalid_argument("mock table: unknown condition " + key);
    }
  }
  return true;
}

// Real models wrap their JSON in different ways; the mock imitates a few so
// the validator's unwrapping is exercised end to end.
std::string Render(const json& report, std::string_view style) {
  const std::string body = report.dump();
  if (style == "fenced") return "```json\n" + body + "\n```";
  if (style == "prose") {
    return "Assessment of the window follows.\n" + body +
           "\nLet me know if more context is needed.";
  }
  return body;
}

void SleepSeconds(double s) {
  if (s > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  }
}

}  // namespace

void LlmBackendConfig::Validate() const {
  if (backend != "mock" && backend != "http") {
    throw std::invalid_argument("unknown LLM backend '" + backend + "'");
  }
  if (!(timeout_s > 0.0)) {
    throw std::invalid_argument("LLM timeout must be positive");
  }
  if (max_retries < 0) {
    throw std::invalid_argument("LLM max_retries must be non-negative");
  }
  if (backend == "http") SplitUrl(base_url);
}

std::string_view UnavailableReasonName(LlmUnavailable::Reason reason) {
  switch (reason) {
    case Reason::kTimeout: return "timeout";
    case Reason::kTransport: return "transport_error";
    case Reason::kRateLimited: return "rate_limited";
  }
  return "?";
}

MockLlmBackend::MockLlmBackend() : table_json_(DefaultMockTable()) {}

MockLlmBackend::MockLlmBackend(std::string table_json)
    : table_json_(std::move(table_json)) {}

std::string MockLlmBackend::Answer(std::string_view features_json) const {
  const json table = json::parse(table_json_);
  const Fingerprint fp = ReadFingerprint(json::parse(features_json));
  for (const json& rule : table.at("rules")) {
    if (Matches(rule.value("when", json::object()), fp)) {
      return Render(rule.at("report"), rule.value("style", "plain"));
    }
  }
  throw std::invalid_argument("mock table has no fallback rule");
}

std::string MockLlmBackend::Complete(std::string_view prompt) {
  ++calls_;
  const size_t at = prompt.find(kFeaturesMarker);
  if (at == std::string_view::npos) {
    return R"({"tactic":"none","technique":"no telemetry supplied",)"
           R"("attack_paths":[],"mitigations":[],"confidence":0.5})";
  }
  std::string_view rest = prompt.substr(at + kFeaturesMarker.size());
  rest = rest.substr(0, rest.find('\n'));
  return Answer(rest);
}

ChatCompletionsBackend::ChatCompletionsBackend(LlmBackendConfig config)
    : config_(std::move(config)) {
  config_.Validate();
}

std::string ChatCompletionsBackend::Complete(std::string_view prompt) {
  const Endpoint ep = SplitUrl(config_.base_url);
  json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       json::array({{{"role", "system"}, {"content", kSystemPrompt}},
                    {{"role", "user"}, {"content", std::string(prompt)}}})}};
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str());
      key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_s));
  Reason last_reason = Reason::kTransport;
  std::string last_error;
  double backoff = config_.backoff_initial_s;

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      SleepSeconds(std::min(backoff, config_.backoff_max_s));
      backoff *= 2.0;
    }
    ++attempts_;
    // A fresh client per attempt: nothing survives a timed-out exchange.
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto result = client.Post(ep.path + "/chat/completions", headers, payload,
                              "application/json");
    if (!result) {
      const httplib::Error err = result.error();
      last_reason = (err == httplib::Error::ConnectionTimeout ||
                     err == httplib::Error::Read)
                        ? Reason::kTimeout
                        : Reason::kTransport;
      last_error = httplib::to_string(err);
      continue;
    }
    const int status = result->status;
    if (status == 429) {
      last_reason = Reason::kRateLimited;
      last_error = "HTTP 429";
      if (result->has_header("Retry-After")) {
        const double wait = std::atof(result->get_header_value("Retry-After").c_str());
        backoff = std::max(backoff, std::min(wait, config_.backoff_max_s));
      }
      continue;
    }
    if (status >= 500) {
      last_reason = Reason::kTransport;
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw LlmUnavailable(Reason::kTransport,
                           "HTTP " + std::to_string(status) + " from " +
                               config_.base_url);
    }
    try {
      const json reply = json::parse(result->body);
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const json::exception& e) {
      throw LlmUnavailable(Reason::kTransport,
                           std::string("malformed completion envelope: ") +
                               e.what());
    }
  }
  throw LlmUnavailable(last_reason,
                       last_error + " after " +
                           std::to_string(config_.max_retries + 1) +
                           " attempts to " + config_.base_url);
}

std::unique_ptr<LlmBackend> MakeLlmBackend(const LlmBackendConfig& config) {
  config.Validate();
  if (config.backend == "mock") return std::make_unique<MockLlmBackend>();
  return std::make_unique<ChatCompletionsBackend>(config);
}

}  // namespace twinguard
