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

// Runs the shipped toy pipeline in a scratch copy and compares its artifacts
// with the committed golden files.

#ifndef HIRO_TESTS_SUPPORT_PIPELINE_RUN_H_
#define HIRO_TESTS_SUPPORT_PIPELINE_RUN_H_

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hiro/common.h"
#include "hiro/pipeline.h"

namespace hiro::testing {

// Text artifacts pinned by the golden set. The manifest carries timestamps
// and the model carries many digits of training state, so both stay out.
inline const std::vector<std::string>& GoldenFiles() {
  static const std::vector<std::string> files = {
      "corpus.json",        "pairs.jsonl",         "assignments.jsonl",
      "selections.json",    "summaries_sample0.jsonl", "summaries_sample1.jsonl",
      "summaries_sample2.jsonl", "report.json",    "report.csv",
      "report.md",          "depth_histogram.csv"};
  return files;
}

// Copies the toy fixture into `dir` and runs every stage there.
inline std::map<std::string, std::string> RunToyPipeline(
    const std::filesystem::path& dir,
    const std::vector<std::string>& overrides = {}) {
  std::filesystem::copy(HIRO_FIXTURES_DIR "/toy", dir,
                        std::filesystem::copy_options::recursive);
  const PipelineConfig config = PipelineConfig::Load(dir / "config.json", overrides);
  RunAll(config);
  std::map<std::string, std::string> out;
  for (const auto& name : GoldenFiles()) out[name] = ReadFile(config.Output(name));
  return out;
}

// Names of artifacts that differ from the golden copies. With
// HIRO_UPDATE_GOLDEN set the golden files are rewritten instead.
inline std::vector<std::string> GoldenMismatches(
    const std::map<std::string, std::string>& artifacts) {
  const std::filesystem::path golden = HIRO_GOLDEN_DIR "/toy";
  std::vector<std::string> bad;
  if (std::getenv("HIRO_UPDATE_GOLDEN") != nullptr) {
    std::filesystem::create_directories(golden);
    for (const auto& [name, text] : artifacts) WriteFileAtomic(golden / name, text);
    return bad;
  }
  for (const auto& [name, text] : artifacts) {
    if (!std::filesystem::exists(golden / name) ||
        ReadFile(golden / name) != text) {
      bad.push_back(name);
    }
  }
  return bad;
}

}  // namespace hiro::testing

#endif  // HIRO_TESTS_SUPPORT_PIPELINE_RUN_H_
