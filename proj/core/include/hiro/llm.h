// Copyright 2026 The HIRO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIRO_LLM_H_
#define HIRO_LLM_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "hiro/common.h"

namespace hiro {

struct LlmRequest {
  std::string prompt;
  int max_words = 0;  // hint only; 0 means none
  double temperature = 0.7;
  int sample = 0;
};

// Single-turn text completion backend. Implementations must tolerate
// concurrent calls. Complete may throw TransportError.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string Complete(const LlmRequest& request) const = 0;
  virtual std::string id() const = 0;
};

// Returns the first prompt line that is neither blank nor ends in ':', which
// for the built-in templates is the first input sentence or review.
class EchoLlm final : public LlmClient {
 public:
  std::string Complete(const LlmRequest& request) const override;
  std::string id() const override { return "mock:echo"; }
};

class ConstantLlm final : public LlmClient {
 public:
  explicit ConstantLlm(std::string text) : text_(std::move(text)) {}
  std::string Complete(const LlmRequest&) const override { return text_; }
  std::string id() const override { return "mock:constant"; }

 private:
  std::string text_;
};

// Serves recorded responses keyed by the SHA-256 of the prompt. Fixture
// lines: {"prompt_sha256": str, "responses": [str, ...]}; sample i receives
// responses[i % size]. Unknown prompts are an error.
class ReplayLlm final : public LlmClient {
 public:
  static ReplayLlm Load(const std::filesystem::path& path);
  static ReplayLlm FromJsonl(std::string_view text);
  std::string Complete(const LlmRequest& request) const override;
  std::string id() const override { return "mock:replay"; }

 private:
  std::map<std::string, std::vector<std::string>> responses_;
};

// Wraps another client and keeps every exchange so it can be written out as
// a ReplayLlm fixture.
class RecordingLlm final : public LlmClient {
 public:
  explicit RecordingLlm(const LlmClient& inner) : inner_(inner) {}
  std::string Complete(const LlmRequest& request) const override;
  std::string id() const override { return inner_.id(); }
  std::string ToJsonl() const;

 private:
  const LlmClient& inner_;
  mutable std::mutex mu_;
  // digest -> sample -> response
  mutable std::map<std::string, std::map<int, std::string>> log_;
};

// OpenAI-compatible chat completions endpoint.
class HttpLlm final : public LlmClient {
 public:
  HttpLlm(std::string endpoint, std::string model, std::string api_key,
          int timeout_seconds = 120);
  std::string Complete(const LlmRequest& request) const override;
  std::string id() const override { return "http:" + model_; }

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  int timeout_seconds_;
};

struct LlmOptions {
  // "echo", "constant", "replay" or "http".
  std::string backend = "echo";
  std::string endpoint;
  std::string model;
  std::string constant_text;
  std::filesystem::path replay_path;
  int timeout_seconds = 120;
};

// HTTP backends read their token from HIRO_LLM_API_KEY.
std::unique_ptr<LlmClient> MakeLlmClient(const LlmOptions& options);

// Retries TransportError up to `max_retries` extra times.
std::string CompleteWithRetry(const LlmClient& client,
                              const LlmRequest& request, int max_retries);

}  // namespace hiro

#endif  // HIRO_LLM_H_
