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

#ifndef HIRO_EVALMETRICS_H_
#define HIRO_EVALMETRICS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiro/corpus.h"
#include "hiro/nli.h"

namespace hiro {

// Options shared by the NLI-backed metrics.
struct NliEvalOptions {
  double threshold = 0.5;
  int max_retries = 3;
  int parallelism = 1;
};

// Mean over summary sentences of the fraction of reviews that hold at least
// one sentence entailing it. Each review is a list of sentences.
double Prevalence(std::span<const std::string> summary,
                  std::span<const std::vector<std::string>> reviews,
                  const EntailmentClient& nli,
                  const NliEvalOptions& options = {});

// For every entity, the mean over its summary sentences of how many other
// entities' full summaries (sentences joined by spaces) entail the sentence.
std::vector<double> Genericness(
    std::span<const std::vector<std::string>> summaries,
    const EntailmentClient& nli, const NliEvalOptions& options = {});

inline double Sap(double prevalence, double genericness, double alpha) {
  return prevalence - alpha * genericness;
}

struct AttributedSentence {
  std::string text;
  // One cluster for sentence-level evidence; every cluster of the selection
  // for document-level evidence. The best cluster counts.
  std::vector<std::vector<std::string>> evidence;
};

struct AttributionResult {
  double partial_pct = 0.0;   // sentences with >= 1 supporter
  double majority_pct = 0.0;  // sentences with >= half their cluster
};

// A cluster sentence supports a summary sentence when entailment holds in
// either direction.
AttributionResult AttributionSupport(std::span<const AttributedSentence> summary,
                                     const EntailmentClient& nli,
                                     const NliEvalOptions& options = {});

// Similarity between two items addressed by index.
using PairSimilarity = std::function<double(std::size_t, std::size_t)>;

PairSimilarity TfidfPairSimilarity(const Vectorizer& vectorizer);
// Mean of the two directional entailment probabilities of corpus sentences.
PairSimilarity NliPairSimilarity(const Corpus& corpus,
                                 const EntailmentClient& nli, int max_retries);

struct ClusterQuality {
  double purity = 0.0;
  double colocation = 0.0;
  double quality = 0.0;  // purity - colocation
  std::size_t purity_pairs = 0;
  std::size_t colocation_pairs = 0;
  bool sampled = false;
};

inline constexpr std::size_t kMaxExhaustivePairs = 1000000;

// Purity pools every within-cluster pair; colocation pools every pair of
// items from different clusters. Pairs of an item with itself are skipped.
// Either pool larger than `max_pairs` is replaced by a uniform sample of
// `max_pairs` pairs drawn from `seed`.
ClusterQuality EvaluateClusters(
    std::span<const std::vector<std::size_t>> clusters,
    const PairSimilarity& similarity, std::uint64_t seed,
    std::size_t max_pairs = kMaxExhaustivePairs);

// Adjusted Rand index of two labelings of the same items.
double AdjustedRandIndex(std::span<const int> a, std::span<const int> b);
// Items missing from either clustering are excluded.
double AdjustedRandIndex(const std::map<std::string, int>& a,
                         const std::map<std::string, int>& b);

// ROUGE over corpus tokens, without stemming or stopword removal.
double Rouge2F1(std::string_view candidate, std::string_view reference);
double RougeLF1(std::string_view candidate, std::string_view reference);
enum class RougeVariant { kR2F1, kRLF1 };
// Maximum over references; 0 when there are none.
double Rouge(std::string_view candidate,
             std::span<const std::string> references, RougeVariant variant);

struct EntityEval {
  std::string entity_id;
  double prevalence = 0.0;
  double genericness = 0.0;
  double sap = 0.0;
  std::optional<double> rouge2_f1;
  std::optional<double> rougeL_f1;
  double partial_support_pct = 0.0;
  double majority_support_pct = 0.0;
};

struct EvalReport {
  double alpha_sap = 0.5;
  std::string nli_backend;
  std::string similarity_mode;
  std::vector<EntityEval> entities;
  EntityEval aggregate;  // means over entities
  // Index quality for the clusters formed by each subpath depth.
  std::map<std::size_t, ClusterQuality> depth_quality;
  std::optional<double> ari;
  nlohmann::json config;

  // Fills `aggregate` from `entities`.
  void Aggregate();
  nlohmann::json ToJson() const;
  static EvalReport FromJson(const nlohmann::json& j);
  // One row per entity plus a final "mean" row.
  std::string ToCsv() const;
};

}  // namespace hiro

#endif  // HIRO_EVALMETRICS_H_
