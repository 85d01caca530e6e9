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

#ifndef HIRO_NLI_H_
#define HIRO_NLI_H_

#include <memory>
#include <string>
#include <string_view>

#include "hiro/common.h"

namespace hiro {

// Natural-language-inference backend. Implementations must tolerate
// concurrent calls.
class EntailmentClient {
 public:
  virtual ~EntailmentClient() = default;

  // Probability that `premise` entails `hypothesis`. May throw
  // TransportError.
  virtual double PEntail(std::string_view premise,
                         std::string_view hypothesis) const = 0;

  // Backend identifier recorded in reports.
  virtual std::string id() const = 0;
};

enum class EntailmentLabel { kEntailed, kNotEntailed };

struct EntailmentVerdict {
  std::string premise_id;
  std::string hypothesis_id;
  double p_entail = 0.0;
  EntailmentLabel label = EntailmentLabel::kNotEntailed;
};

inline EntailmentLabel Classify(double p_entail, double threshold) {
  return p_entail > threshold ? EntailmentLabel::kEntailed
                              : EntailmentLabel::kNotEntailed;
}

// Offline mock: p = 1 when the token-set Jaccard overlap of premise and
// hypothesis is >= `min_overlap`, else 0.
class JaccardEntailment final : public EntailmentClient {
 public:
  explicit JaccardEntailment(double min_overlap = 0.5)
      : min_overlap_(min_overlap) {}
  double PEntail(std::string_view premise,
                 std::string_view hypothesis) const override;
  std::string id() const override { return "mock:jaccard"; }

 private:
  double min_overlap_;
};

// Token-set Jaccard overlap using the corpus tokenizer. Empty vs empty is 0.
double TokenJaccard(std::string_view a, std::string_view b);

class ConstantEntailment final : public EntailmentClient {
 public:
  explicit ConstantEntailment(double p) : p_(p) {}
  double PEntail(std::string_view, std::string_view) const override {
    return p_;
  }
  std::string id() const override {
    return p_ > 0.5 ? "mock:all" : "mock:none";
  }

 private:
  double p_;
};

// POST {"premise", "hypothesis"} -> {"p_entail"}.
class HttpEntailment final : public EntailmentClient {
 public:
  HttpEntailment(std::string endpoint, std::string api_key,
                 int timeout_seconds = 60);
  double PEntail(std::string_view premise,
                 std::string_view hypothesis) const override;
  std::string id() const override { return "http:" + endpoint_; }

 private:
  std::string endpoint_;
  std::string api_key_;
  int timeout_seconds_;
};

struct NliOptions {
  // "jaccard", "all", "none" or "http".
  std::string backend = "jaccard";
  std::string endpoint;
  int timeout_seconds = 60;
};

// HTTP backends read their token from HIRO_NLI_API_KEY.
std::unique_ptr<EntailmentClient> MakeEntailmentClient(const NliOptions& options);

// Calls `client` retrying TransportError up to `max_retries` extra times.
// The final failure is rethrown with `what` prepended.
double PEntailWithRetry(const EntailmentClient& client,
                        std::string_view premise, std::string_view hypothesis,
                        int max_retries, std::string_view what);

}  // namespace hiro

#endif  // HIRO_NLI_H_
