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

// Twin state endpoint: serves trailing windows of a recorded dataset over
// HTTP, plus the client-side sources the detection loop pulls from.
//
//   GET /state?index=<int>[&length=<int>]  -> StatePayload JSON
//   GET /health                            -> {"rows": n, "window": L}
//
// Status codes: 400 insufficient history, 404 index past the dataset,
// 422 malformed query, 409 out-of-order read in strict mode, 503 before a
// dataset is loaded.

#ifndef TWINGUARD_REPLAY_SERVICE_H_
#define TWINGUARD_REPLAY_SERVICE_H_

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "twinguard/telemetry.h"

namespace twinguard {

struct StatePayload {
  int64_t end_index = 0;
  int length = 0;
  std::array<std::vector<double>, kNumSensors> series;
  std::array<std::vector<int>, kNumActuators> actuator_series;
  std::string generated_at;  // ISO-8601 UTC.

  static StatePayload FromWindow(const Window& window,
                                 std::string generated_at);
  // Labels are not served; the returned window has none.
  Window ToWindow() const;

  std::string ToJson() const;
  // Throws std::invalid_argument on a malformed or inconsistent document.
  static StatePayload FromJson(std::string_view text);
};

std::string UtcTimestamp();

struct HttpReply {
  int status = 200;
  std::string body;
};

class ReplayService {
 public:
  explicit ReplayService(int default_window = 30);
  ~ReplayService();

  ReplayService(const ReplayService&) = delete;
  ReplayService& operator=(const ReplayService&) = delete;

  // Replaces the served dataset atomically; readers see either the old or
  // the new one. Resets the strict-order cursor.
  void Load(std::vector<TelemetryRecord> records);
  bool loaded() const;
  int64_t rows() const;
  int default_window() const { return default_window_; }

  // In strict mode every /state read must use a larger index than the
  // previous successful read.
  void set_strict_order(bool strict);

  // Transport-independent handlers; the HTTP routes call these.
  HttpReply HandleState(const std::optional<std::string>& index,
                        const std::optional<std::string>& length);
  HttpReply HandleHealth() const;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port; throws std::runtime_error if binding fails.
  int Start(const std::string& host, int port);
  // Blocks the calling thread until Stop() is called from elsewhere.
  void Serve(const std::string& host, int port);
  void Stop();

 private:
  class Http;

  const int default_window_;
  mutable std::shared_mutex data_mutex_;
  std::shared_ptr<const std::vector<TelemetryRecord>> data_;
  std::mutex order_mutex_;
  bool strict_order_ = false;
  std::optional<int64_t> last_served_;
  std::unique_ptr<Http> http_;
  std::thread thread_;
};

class ReplayError : public std::runtime_error {
 public:
  // status 0 means the service could not be reached at all.
  ReplayError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }
  bool unreachable() const { return status_ == 0; }

 private:
  int status_;
};

// Where the detection loop gets its windows from.
class ReplaySource {
 public:
  virtual ~ReplaySource() = default;
  // Throws ReplayError or TelemetryError.
  virtual Window Fetch(int64_t end_index, int length) = 0;
};

// In-process slicing over a dataset held in memory.
class EmbeddedReplay : public ReplaySource {
 public:
  explicit EmbeddedReplay(std::span<const TelemetryRecord> records)
      : records_(records) {}
  Window Fetch(int64_t end_index, int length) override;

 private:
  std::span<const TelemetryRecord> records_;
};

// GET {base_url}/state over HTTP.
class HttpReplayClient : public ReplaySource {
 public:
  explicit HttpReplayClient(std::string base_url, double timeout_s = 10.0);
  ~HttpReplayClient() override;

  Window Fetch(int64_t end_index, int length) override;
  // rows and window from /health.
  std::pair<int64_t, int> Health();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace twinguard

#endif  // TWINGUARD_REPLAY_SERVICE_H_
