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

#ifndef HIRO_GENERATION_H_
#define HIRO_GENERATION_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiro/corpus.h"
#include "hiro/llm.h"
#include "hiro/retriever.h"

namespace hiro {

// Prompt templates. "{entity name}" is replaced by the entity's display name
// and "[...]" by the input text.
struct PromptSet {
  std::string zero_shot;
  std::string sent;
  std::string doc;

  static PromptSet Builtin();
  // Reads zero_shot.txt, sent.txt and doc.txt; one trailing newline is
  // stripped from each.
  static PromptSet FromDirectory(const std::filesystem::path& dir);
};

// Fills a cluster template: sentences are newline separated.
std::string RenderClusterPrompt(std::string_view tmpl,
                                std::string_view entity_name,
                                std::span<const std::string> sentences);

// Fills the zero-shot template. Its run of "Review:\n[...]\n" blocks, or a
// single block with a repeat marker ("[...] (x8)"), becomes one block per
// review.
std::string RenderZeroShotPrompt(std::string_view tmpl,
                                 std::span<const std::string> reviews);

enum class SummaryMode { kExt, kSent, kDoc, kZeroShot };

std::string ToString(SummaryMode mode);
SummaryMode ParseSummaryMode(std::string_view s);

struct Summary {
  std::string entity_id;
  SummaryMode mode = SummaryMode::kExt;
  std::vector<std::string> sentences;
  // ext/sent: evidence[i] is the cluster (sentence ids) behind sentence i.
  // doc: one entry per selected cluster.
  std::vector<std::vector<std::string>> evidence;
  std::string model;
  double temperature = 0.0;
  int sample = 0;
  std::vector<std::string> warnings;
  bool truncated = false;

  std::string Text() const;  // sentences joined by single spaces
};

// Index of the member with the highest mean ROUGE-2 F1 against the other
// members; the earliest member wins ties. Requires a non-empty cluster.
std::size_t CentroidSentence(std::span<const std::string> sentences);

// Members ordered by mean tf-idf cosine to the rest of the cluster,
// descending; ties keep cluster order.
std::vector<std::string> OrderByCentrality(std::span<const std::string> ids,
                                           const Corpus& corpus,
                                           const Vectorizer& vectorizer);

// First sentence of an LLM response under the corpus sentence splitter.
std::string FirstSentence(std::string_view text);

inline constexpr char kPlaceholderSentence[] = "[no summary generated]";

struct GenerationOptions {
  double temperature = 0.7;
  int sample = 0;
  int parallelism = 1;
  int max_retries = 3;
  // Prompt input budget for doc mode, in characters; 0 disables the limit.
  std::size_t char_budget = 12000;
  PromptSet prompts = PromptSet::Builtin();
};

Summary SummarizeExt(const ClusterSelection& selection, const Corpus& corpus);

Summary SummarizeSent(const ClusterSelection& selection, const Corpus& corpus,
                      const Vectorizer& vectorizer, const LlmClient& llm,
                      std::string_view entity_name,
                      const GenerationOptions& options);

Summary SummarizeDoc(const ClusterSelection& selection, const Corpus& corpus,
                     const Vectorizer& vectorizer, const LlmClient& llm,
                     std::string_view entity_name,
                     const GenerationOptions& options);

// Baseline: the zero-shot prompt over the given review texts.
Summary SummarizeZeroShot(std::string_view entity_id,
                          std::span<const std::string> reviews,
                          const LlmClient& llm,
                          const GenerationOptions& options);

std::string SummariesToJsonl(std::span<const Summary> summaries);
std::vector<Summary> SummariesFromJsonl(std::string_view text);

}  // namespace hiro

#endif  // HIRO_GENERATION_H_
