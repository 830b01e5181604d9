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

// Chat-completion backends: an OpenAI-compatible HTTP client and a
// deterministic offline mock.

#ifndef TWINGUARD_LLM_BACKEND_H_
#define TWINGUARD_LLM_BACKEND_H_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twinguard {

struct LlmBackendConfig {
  std::string backend = "mock";  // "mock" or "http".
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "llama-3.1-8b-instruct";
  double timeout_s = 30.0;
  int max_retries = 2;
  double temperature = 0.0;
  // Name of the environment variable holding the bearer token. An unset or
  // empty variable sends no Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  double backoff_initial_s = 0.25;
  double backoff_max_s = 4.0;

  // Throws std::invalid_argument unless timeout > 0, retries >= 0 and the
  // backend name is known.
  void Validate() const;
};

class LlmUnavailable : public std::runtime_error {
 public:
  enum class Reason { kTimeout, kTransport, kRateLimited };

  LlmUnavailable(Reason reason, const std::string& message)
      : std::runtime_error(message), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

std::string_view UnavailableReasonName(LlmUnavailable::Reason reason);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Returns the raw model text. Throws LlmUnavailable when no answer could be
  // obtained.
  virtual std::string Complete(std::string_view prompt) = 0;
  virtual std::string_view name() const = 0;
};

// Maps a coarse fingerprint of the prompt's FEATURES_JSON block (rising
// level, freeze bucket, valve toggling) to canned reports from a rule table.
// The default table is compiled into the library.
class MockLlmBackend : public LlmBackend {
 public:
  MockLlmBackend();
  explicit MockLlmBackend(std::string table_json);

  std::string Complete(std::string_view prompt) override;
  std::string_view name() const override { return "mock"; }

  int64_t calls() const { return calls_; }

  // Same mapping, applied to an already extracted feature document.
  std::string Answer(std::string_view features_json) const;

 private:
  std::string table_json_;
  int64_t calls_ = 0;
};

// POST {base_url}/chat/completions. Transport failures, 5xx and 429 are
// retried with exponential backoff up to max_retries extra attempts.
class ChatCompletionsBackend : public LlmBackend {
 public:
  explicit ChatCompletionsBackend(LlmBackendConfig config);

  std::string Complete(std::string_view prompt) override;
  std::string_view name() const override { return "http"; }

  int64_t attempts() const { return attempts_; }

 private:
  LlmBackendConfig config_;
  int64_t attempts_ = 0;
};

std::unique_ptr<LlmBackend> MakeLlmBackend(const LlmBackendConfig& config);

// The compiled-in mock rule table.
std::string_view DefaultMockTable();

}  // namespace twinguard

#endif  // TWINGUARD_LLM_BACKEND_H_
