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

#ifndef HIRO_PIPELINE_H_
#define HIRO_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiro/embeddings.h"
#include "hiro/llm.h"
#include "hiro/nli.h"
#include "hiro/pairing.h"
#include "hiro/quantizer.h"

namespace hiro {

inline constexpr char kToolVersion[] = "0.1.0";

struct RetrievalConfig {
  int k = 8;
  double alpha = 6.0;
  bool postprocess = true;
  double drop_threshold = 0.05;
  double merge_threshold = 0.5;
};

struct GenerationConfig {
  // "ext", "sent", "doc" or "zero_shot".
  std::string mode = "ext";
  double temperature = 0.7;
  int samples = 3;
  LlmOptions llm;
  std::filesystem::path prompts_dir;  // empty: built-in templates
  int parallelism = 1;
  int max_retries = 3;
  std::size_t char_budget = 12000;
  int zero_shot_reviews = 8;
};

struct EvalConfig {
  double alpha_sap = 0.5;
  // Similarity for purity and colocation: "tfidf" or "nli".
  std::string similarity = "tfidf";
  // Optional JSONL {"entity_id", "summaries": [str, ...]} for ROUGE.
  std::filesystem::path references;
  // Optional JSONL {"sentence_id", "label"} for ARI against selections.
  std::filesystem::path reference_clusters;
  double nli_threshold = 0.5;
  int parallelism = 1;
  std::size_t max_pairs = 1000000;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  // Relative paths resolve against base_dir, the config file's directory.
  std::filesystem::path base_dir = ".";
  std::filesystem::path corpus_path;
  std::filesystem::path embeddings_path;  // manifest for embeddings mode "file"
  std::filesystem::path model_path;       // optional pre-trained model
  std::filesystem::path outputs_path = "out";

  EmbeddingOptions embeddings;
  PairingConfig pairing;
  NliOptions nli;
  double nli_min_overlap = 0.5;  // Jaccard mock
  QuantizerConfig quantizer;
  RetrievalConfig retrieval;
  GenerationConfig generation;
  EvalConfig eval;

  // Parses a config document. Unknown keys are errors.
  static PipelineConfig FromJson(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir);
  // Reads `path`, applies "dotted.key=value" overrides, then parses. Values
  // that parse as JSON are used as such, anything else as a string.
  static PipelineConfig Load(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
  nlohmann::json ToJson() const;
  void Validate() const;

  std::filesystem::path Resolve(const std::filesystem::path& p) const;
  std::filesystem::path Output(std::string_view name) const;
};

// Applies one "a.b.c=value" override to a config document.
void ApplyOverride(nlohmann::json& doc, std::string_view assignment);

enum class Stage {
  kIngest,
  kMinePairs,
  kTrain,
  kIndex,
  kRetrieve,
  kSummarize,
  kEvaluate,
  kReport,
};

std::string ToString(Stage stage);
Stage ParseStage(std::string_view name);
std::vector<Stage> AllStages();

// Runs one stage, reading upstream artifacts from the outputs directory and
// recording digests in run_manifest.json. Missing or stale upstream
// artifacts raise an error naming the stage to rerun.
void RunStage(Stage stage, const PipelineConfig& config);
void RunAll(const PipelineConfig& config);

}  // namespace hiro

#endif  // HIRO_PIPELINE_H_
