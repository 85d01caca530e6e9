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

#include "hiro/llm.h"

#include <sstream>

#include <nlohmann/json.hpp>

#include "http_json.h"

namespace hiro {

using nlohmann::json;

std::string EchoLlm::Complete(const LlmRequest& request) const {
  std::istringstream in(request.prompt);
  std::string line;
  while (std::getline(in, line)) {
    const auto last = line.find_last_not_of(" \t\r");
    if (last == std::string::npos || line[last] == ':') continue;
    return line.substr(0, last + 1);
  }
  return "";
}

ReplayLlm ReplayLlm::Load(const std::filesystem::path& path) {
  return FromJsonl(ReadFile(path));
}

ReplayLlm ReplayLlm::FromJsonl(std::string_view text) {
  ReplayLlm llm;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      auto responses = j.at("responses").get<std::vector<std::string>>();
      if (responses.empty()) throw Error("empty responses");
      llm.responses_[j.at("prompt_sha256").get<std::string>()] =
          std::move(responses);
    } catch (const std::exception& e) {
      throw Error("replay fixture line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return llm;
}

std::string ReplayLlm::Complete(const LlmRequest& request) const {
  const std::string digest = Sha256Hex(request.prompt);
  auto it = responses_.find(digest);
  if (it == responses_.end()) {
    throw Error("no recorded response for prompt " + digest);
  }
  const auto& r = it->second;
  return r[static_cast<std::size_t>(request.sample) % r.size()];
}

std::string RecordingLlm::Complete(const LlmRequest& request) const {
  std::string response = inner_.Complete(request);
  std::lock_guard<std::mutex> lock(mu_);
  log_[Sha256Hex(request.prompt)][request.sample] = response;
  return response;
}

std::string RecordingLlm::ToJsonl() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out;
  for (const auto& [digest, by_sample] : log_) {
    std::vector<std::string> responses;
    for (const auto& [_, r] : by_sample) responses.push_back(r);
    out += json{{"prompt_sha256", digest}, {"responses", responses}}.dump();
    out += '\n';
  }
  return out;
}

HttpLlm::HttpLlm(std::string endpoint, std::string model, std::string api_key,
                 int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {}

std::string HttpLlm::Complete(const LlmRequest& request) const {
  const json body = {
      {"model", model_},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature}};
  const json res =
      internal::PostJson({endpoint_, api_key_, timeout_seconds_}, body);
  try {
    return res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("chat completion response: ") + e.what());
  }
}

std::unique_ptr<LlmClient> MakeLlmClient(const LlmOptions& options) {
  if (options.backend == "echo") return std::make_unique<EchoLlm>();
  if (options.backend == "constant") {
    return std::make_unique<ConstantLlm>(options.constant_text);
  }
  if (options.backend == "replay") {
    return std::make_unique<ReplayLlm>(ReplayLlm::Load(options.replay_path));
  }
  if (options.backend == "http") {
    if (options.endpoint.empty()) throw Error("generation.endpoint is required");
    if (options.model.empty()) throw Error("generation.model is required");
    return std::make_unique<HttpLlm>(options.endpoint, options.model,
                                     internal::EnvOrEmpty("HIRO_LLM_API_KEY"),
                                     options.timeout_seconds);
  }
  throw Error("unknown generation backend: " + options.backend);
}

std::string CompleteWithRetry(const LlmClient& client,
                              const LlmRequest& request, int max_retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return client.Complete(request);
    } catch (const TransportError& e) {
      if (attempt >= max_retries) {
        throw TransportError(std::string("completion request: ") + e.what());
      }
    }
  }
}

}  // namespace hiro
