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

#include "http_json.h"

#include <cstdlib>

#include "hiro/common.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace hiro::internal {
namespace {

// Splits "scheme://host[:port]/path" into the client base and request path.
std::pair<std::string, std::string> SplitUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("endpoint must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

nlohmann::json PostJson(const HttpEndpoint& endpoint,
                        const nlohmann::json& body) {
  const auto [base, path] = SplitUrl(endpoint.url);
  httplib::Client client(base);
  client.set_connection_timeout(endpoint.timeout_seconds);
  client.set_read_timeout(endpoint.timeout_seconds);
  client.set_write_timeout(endpoint.timeout_seconds);
  if (!endpoint.bearer_token.empty()) {
    client.set_bearer_token_auth(endpoint.bearer_token);
  }
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw TransportError("POST " + endpoint.url + " failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("POST " + endpoint.url + " returned HTTP " +
                         std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError("POST " + endpoint.url +
                         " returned invalid JSON: " + e.what());
  }
}

std::string EnvOrEmpty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

}  // namespace hiro::internal
