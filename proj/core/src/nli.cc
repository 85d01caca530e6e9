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

#include "hiro/nli.h"

#include <algorithm>
#include <set>

#include "hiro/corpus.h"
#include "http_json.h"

namespace hiro {

double TokenJaccard(std::string_view a, std::string_view b) {
  const auto ta = Tokenize(a);
  const auto tb = Tokenize(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double JaccardEntailment::PEntail(std::string_view premise,
                                  std::string_view hypothesis) const {
  return TokenJaccard(premise, hypothesis) >= min_overlap_ ? 1.0 : 0.0;
}

HttpEntailment::HttpEntailment(std::string endpoint, std::string api_key,
                               int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {}

double HttpEntailment::PEntail(std::string_view premise,
                               std::string_view hypothesis) const {
  const nlohmann::json body = {{"premise", premise}, {"hypothesis", hypothesis}};
  const nlohmann::json res =
      internal::PostJson({endpoint_, api_key_, timeout_seconds_}, body);
  auto it = res.find("p_entail");
  if (it == res.end() || !it->is_number()) {
    throw TransportError("NLI response lacks numeric p_entail");
  }
  return std::clamp(it->get<double>(), 0.0, 1.0);
}

std::unique_ptr<EntailmentClient> MakeEntailmentClient(
    const NliOptions& options) {
  if (options.backend == "jaccard") return std::make_unique<JaccardEntailment>();
  if (options.backend == "all") return std::make_unique<ConstantEntailment>(1.0);
  if (options.backend == "none") return std::make_unique<ConstantEntailment>(0.0);
  if (options.backend == "http") {
    if (options.endpoint.empty()) throw Error("nli.endpoint is required");
    return std::make_unique<HttpEntailment>(
        options.endpoint, internal::EnvOrEmpty("HIRO_NLI_API_KEY"),
        options.timeout_seconds);
  }
  throw Error("unknown NLI backend: " + options.backend);
}

double PEntailWithRetry(const EntailmentClient& client,
                        std::string_view premise, std::string_view hypothesis,
                        int max_retries, std::string_view what) {
  for (int attempt = 0;; ++attempt) {
    try {
      return client.PEntail(premise, hypothesis);
    } catch (const TransportError& e) {
      if (attempt >= max_retries) {
        throw TransportError(std::string(what) + ": " + e.what());
      }
    }
  }
}

}  // namespace hiro
