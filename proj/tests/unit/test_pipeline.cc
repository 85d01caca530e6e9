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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hiro/common.h"
#include "hiro/pipeline.h"
#include "hiro/quantizer.h"
#include "support/oracles.h"
#include "support/pipeline_run.h"

namespace hiro {
namespace {

namespace fs = std::filesystem;

std::string ErrorOf(Stage stage, const PipelineConfig& config) {
  try {
    RunStage(stage, config);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("toy pipeline is byte-stable and matches the golden files") {
  testing::TempDir a, b;
  const auto first = testing::RunToyPipeline(a.path() / "toy");
  const auto second = testing::RunToyPipeline(b.path() / "toy");
  for (const auto& name : testing::GoldenFiles()) {
    INFO(name);
    CHECK(first.at(name) == second.at(name));
  }
  const auto bad = testing::GoldenMismatches(first);
  CHECK_MESSAGE(bad.empty(), "differs from golden: " << (bad.empty() ? "" : bad[0]));
}

TEST_CASE("zero training steps leave the initial model") {
  testing::TempDir tmp;
  testing::RunToyPipeline(tmp.path() / "toy", {"quantizer.steps=0"});
  const PipelineConfig config =
      PipelineConfig::Load(tmp.path() / "toy" / "config.json", {"quantizer.steps=0"});
  const QuantizerModel init =
      QuantizerModel::Initialize(config.quantizer, SubstreamSeed(config.seed, "init"));
  CHECK(QuantizerModel::Load(config.Output("model.json")).ToJson() == init.ToJson());
}

TEST_CASE("stages demand fresh upstream outputs") {
  testing::TempDir tmp;
  const fs::path dir = tmp.path() / "toy";
  fs::copy(HIRO_FIXTURES_DIR "/toy", dir, fs::copy_options::recursive);
  const PipelineConfig config = PipelineConfig::Load(dir / "config.json");

  CHECK(ErrorOf(Stage::kRetrieve, config).find("run `hiro ingest` first") !=
        std::string::npos);
  for (Stage s : {Stage::kIngest, Stage::kMinePairs, Stage::kTrain}) {
    RunStage(s, config);
  }
  CHECK(ErrorOf(Stage::kRetrieve, config).find("'index'") != std::string::npos);
  RunStage(Stage::kIndex, config);
  RunStage(Stage::kRetrieve, config);

  // A changed training setting makes the train stage stale downstream.
  const PipelineConfig changed =
      PipelineConfig::Load(dir / "config.json", {"quantizer.steps=5"});
  CHECK(ErrorOf(Stage::kIndex, changed).find("stage 'train' is stale") !=
        std::string::npos);
  // Retrieval settings only affect the retrieve stage.
  const PipelineConfig k2 = PipelineConfig::Load(dir / "config.json", {"retrieval.k=2"});
  CHECK(ErrorOf(Stage::kIndex, k2).empty());
  CHECK(ErrorOf(Stage::kSummarize, k2).find("stage 'retrieve' is stale") !=
        std::string::npos);

  // Rerunning with identical output keeps consumers valid; new pairs do not.
  RunStage(Stage::kMinePairs, config);
  CHECK(ErrorOf(Stage::kIndex, config).empty());
  const PipelineConfig strict =
      PipelineConfig::Load(dir / "config.json", {"pairing.cand_threshold=0.6"});
  RunStage(Stage::kMinePairs, strict);
  CHECK(ErrorOf(Stage::kIndex, strict).find(
            "stage 'train' is stale (an upstream stage was rerun)") !=
        std::string::npos);

  // Editing an artifact by hand is detected.
  RunAll(config);
  std::ofstream(config.Output("selections.json"), std::ios::app) << " ";
  CHECK(ErrorOf(Stage::kSummarize, config).find("selections.json was modified") !=
        std::string::npos);
}

TEST_CASE("overrides edit nested keys") {
  nlohmann::json doc = {{"retrieval", {{"k", 8}}}};
  ApplyOverride(doc, "retrieval.k=4");
  ApplyOverride(doc, "generation.mode=doc");
  ApplyOverride(doc, "eval.alpha_sap=0.25");
  ApplyOverride(doc, "quantizer.estimator=\"soft\"");
  CHECK(doc["retrieval"]["k"] == 4);
  CHECK(doc["generation"]["mode"] == "doc");
  CHECK(doc["eval"]["alpha_sap"] == 0.25);
  CHECK(doc["quantizer"]["estimator"] == "soft");
  CHECK_THROWS_AS(ApplyOverride(doc, "no_equals_sign"), Error);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  const fs::path base = HIRO_FIXTURES_DIR "/toy";
  nlohmann::json doc = nlohmann::json::parse(ReadFile(base / "config.json"));
  const PipelineConfig parsed = PipelineConfig::FromJson(doc, base);
  CHECK(parsed.seed == 7);
  CHECK(parsed.quantizer.K == 3);
  CHECK(parsed.retrieval.alpha == 6.0);
  CHECK(parsed.Resolve("reviews.jsonl") == base / "reviews.jsonl");
  // The written form parses back to itself.
  CHECK(PipelineConfig::FromJson(parsed.ToJson(), base).ToJson() == parsed.ToJson());

  nlohmann::json unknown = doc;
  unknown["quantizer"]["KK"] = 3;
  CHECK_THROWS_AS(PipelineConfig::FromJson(unknown, base), Error);
  nlohmann::json bad = doc;
  bad["retrieval"]["k"] = 0;
  CHECK_THROWS_AS(PipelineConfig::FromJson(bad, base).Validate(), Error);
  CHECK_THROWS_AS(ParseStage("deploy"), Error);
  for (Stage s : AllStages()) CHECK(ParseStage(ToString(s)) == s);
}

}  // namespace
}  // namespace hiro
