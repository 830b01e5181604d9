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

#include "twinguard/replay_service.h"

#include <charconv>
#include <chrono>
#include <ctime>

#include "httplib.h"
#include "json.hpp"

namespace twinguard {
namespace {

using json = nlohmann::json;

constexpr int kMaxWindow = 100000;

std::optional<int64_t> ParseStrictInt(std::string_view text) {
  int64_t value = 0;
  if (text.empty()) return std::nullopt;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

HttpReply Error(int status, std::string_view message) {
  return {status, json{{"error", message}, {"status", status}}.dump()};
}

}  // namespace

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                          now.time_since_epoch())
                          .count() %
                      1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

StatePayload StatePayload::FromWindow(const Window& window,
                                      std::string generated_at) {
  StatePayload p;
  p.end_index = window.end_index;
  p.length = window.length;
  p.series = window.sensors;
  p.actuator_series = window.actuators;
  p.generated_at = std::move(generated_at);
  return p;
}

Window StatePayload::ToWindow() const {
  Window w;
  w.end_index = end_index;
  w.length = length;
  w.sensors = series;
  w.actuators = actuator_series;
  return w;
}

std::string StatePayload::ToJson() const {
  json s = json::object();
  for (const Tag tag : kSensorTags) {
    s[std::string(TagName(tag))] = series[SlotOf(tag)];
  }
  json a = json::object();
  for (const Tag tag : kActuatorTags) {
    a[std::string(TagName(tag))] = actuator_series[SlotOf(tag)];
  }
  return json{{"end_index", end_index},
              {"length", length},
              {"series", s},
              {"actuator_series", a},
              {"generated_at", generated_at}}
      .dump();
}

StatePayload StatePayload::FromJson(std::string_view text) {
  StatePayload p;
  try {
    const json doc = json::parse(text);
    p.end_index = doc.at("end_index").get<int64_t>();
    p.length = doc.at("length").get<int>();
    p.generated_at = doc.value("generated_at", "");
    for (const Tag tag : kSensorTags) {
      p.series[SlotOf(tag)] =
          doc.at("series").at(std::string(TagName(tag))).get<std::vector<double>>();
    }
    for (const Tag tag : kActuatorTags) {
      p.actuator_series[SlotOf(tag)] = doc.at("actuator_series")
                                           .at(std::string(TagName(tag)))
                                           .get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad state payload: ") + e.what());
  }
  const auto n = static_cast<size_t>(p.length);
  for (const auto& s : p.series) {
    if (s.size() != n) throw std::invalid_argument("series length mismatch");
  }
  for (const auto& a : p.actuator_series) {
    if (a.size() != n) throw std::invalid_argument("series length mismatch");
  }
  return p;
}

class ReplayService::Http {
 public:
  httplib::Server server;
};

ReplayService::ReplayService(int default_window)
    : default_window_(default_window) {}

ReplayService::~ReplayService() { Stop(); }

void ReplayService::Load(std::vector<TelemetryRecord> records) {
  auto data =
      std::make_shared<const std::vector<TelemetryRecord>>(std::move(records));
  {
    std::unique_lock lock(data_mutex_);
    data_ = std::move(data);
  }
  std::lock_guard lock(order_mutex_);
  last_served_.reset();
}

bool ReplayService::loaded() const {
  std::shared_lock lock(data_mutex_);
  return data_ != nullptr;
}

int64_t ReplayService::rows() const {
  std::shared_lock lock(data_mutex_);
  return data_ ? static_cast<int64_t>(data_->size()) : 0;
}

void ReplayService::set_strict_order(bool strict) {
  std::lock_guard lock(order_mutex_);
  strict_order_ = strict;
  last_served_.reset();
}

HttpReply ReplayService::HandleState(const std::optional<std::string>& index,
                                     const std::optional<std::string>& length) {
  std::shared_ptr<const std::vector<TelemetryRecord>> data;
  {
    std::shared_lock lock(data_mutex_);
    data = data_;
  }
  if (!data) return Error(503, "no dataset loaded");
  if (!index) return Error(422, "missing index parameter");
  const auto end_index = ParseStrictInt(*index);
  if (!end_index) return Error(422, "index must be an integer");
  int64_t window = default_window_;
  if (length) {
    const auto parsed = ParseStrictInt(*length);
    if (!parsed || *parsed < 1 || *parsed > kMaxWindow) {
      return Error(422, "length must be an integer in [1, 100000]");
    }
    window = *parsed;
  }
  if (*end_index < window - 1) return Error(400, "insufficient history");
  if (*end_index >= static_cast<int64_t>(data->size())) {
    return Error(404, "index beyond dataset");
  }
  {
    std::lock_guard lock(order_mutex_);
    if (strict_order_) {
      if (last_served_ && *end_index <= *last_served_) {
        return Error(409, "out-of-order read: index " +
                              std::to_string(*end_index) + " after " +
                              std::to_string(*last_served_));
      }
      last_served_ = *end_index;
    }
  }
  const Window w = SliceWindow(*data, *end_index, static_cast<int>(window));
  return {200, StatePayload::FromWindow(w, UtcTimestamp()).ToJson()};
}

HttpReply ReplayService::HandleHealth() const {
  std::shared_ptr<const std::vector<TelemetryRecord>> data;
  {
    std::shared_lock lock(data_mutex_);
    data = data_;
  }
  if (!data) return Error(503, "no dataset loaded");
  return {200, json{{"status", "ok"},
                    {"rows", data->size()},
                    {"window", default_window_}}
                   .dump()};
}

int ReplayService::Start(const std::string& host, int port) {
  if (http_) throw std::runtime_error("replay service already running");
  http_ = std::make_unique<Http>();
  http_->server.set_tcp_nodelay(true);
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  http_->server.Get("/state", [this, reply](const httplib::Request& req,
                                            httplib::Response& res) {
    std::optional<std::string> index;
    std::optional<std::string> length;
    if (req.has_param("index")) index = req.get_param_value("index");
    if (req.has_param("length")) length = req.get_param_value("length");
    reply(res, HandleState(index, length));
  });
  http_->server.Get("/health",
                    [this, reply](const httplib::Request&, httplib::Response& res) {
                      reply(res, HandleHealth());
                    });
  const int bound = port == 0 ? http_->server.bind_to_any_port(host)
                              : (http_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    http_.reset();
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return bound;
}

void ReplayService::Serve(const std::string& host, int port) {
  Start(host, port);
  if (thread_.joinable()) thread_.join();
}

void ReplayService::Stop() {
  if (http_) http_->server.stop();
  if (thread_.joinable()) thread_.join();
  http_.reset();
}

Window EmbeddedReplay::Fetch(int64_t end_index, int length) {
  return SliceWindow(records_, end_index, length);
}

class HttpReplayClient::Impl {
 public:
  Impl(const std::string& base_url, double timeout_s) : client(base_url) {
    const auto t = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(timeout_s));
    client.set_connection_timeout(t);
    client.set_read_timeout(t);
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
  }
  httplib::Client client;
  std::string base_url;
};

HttpReplayClient::HttpReplayClient(std::string base_url, double timeout_s)
    : impl_(std::make_unique<Impl>(base_url, timeout_s)) {
  impl_->base_url = std::move(base_url);
}

HttpReplayClient::~HttpReplayClient() = default;

Window HttpReplayClient::Fetch(int64_t end_index, int length) {
  const std::string path = "/state?index=" + std::to_string(end_index) +
                           "&length=" + std::to_string(length);
  auto res = impl_->client.Get(path);
  if (!res) {
    throw ReplayError(0, "replay service unreachable at " + impl_->base_url +
                             ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ReplayError(res->status, "replay GET " + path + " returned " +
                                       std::to_string(res->status) + ": " +
                                       res->body);
  }
  try {
    return StatePayload::FromJson(res->body).ToWindow();
  } catch (const std::invalid_argument& e) {
    throw ReplayError(res->status, e.what());
  }
}

std::pair<int64_t, int> HttpReplayClient::Health() {
  auto res = impl_->client.Get("/health");
  if (!res) {
    throw ReplayError(0, "replay service unreachable at " + impl_->base_url);
  }
  if (res->status != 200) {
    throw ReplayError(res->status, "health returned " + std::to_string(res->status));
  }
  try {
    const json doc = json::parse(res->body);
    return {doc.at("rows").get<int64_t>(), doc.at("window").get<int>()};
  } catch (const json::exception& e) {
    throw ReplayError(res->status, e.what());
  }
}

}  // namespace twinguard
