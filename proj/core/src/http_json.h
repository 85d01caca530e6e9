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

#ifndef HIRO_SRC_HTTP_JSON_H_
#define HIRO_SRC_HTTP_JSON_H_

#include <string>

#include <nlohmann/json.hpp>

namespace hiro::internal {

struct HttpEndpoint {
  std::string url;           // e.g. "https://host:8443/v1/entail"
  std::string bearer_token;  // empty: no Authorization header
  int timeout_seconds = 60;
};

// POSTs `body` as JSON and parses the JSON response. Throws TransportError on
// connection failures, non-2xx statuses and unparsable responses.
nlohmann::json PostJson(const HttpEndpoint& endpoint,
                        const nlohmann::json& body);

// Reads an environment variable, returning "" when unset.
std::string EnvOrEmpty(const char* name);

}  // namespace hiro::internal

#endif  // HIRO_SRC_HTTP_JSON_H_
