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

// Command-line driver for the indexing, retrieval and summarization pipeline.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hiro/pipeline.h"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::optional<int> samples;
};

hiro::PipelineConfig LoadConfig(const GlobalFlags& flags) {
  std::vector<std::string> overrides = flags.overrides;
  if (flags.seed) overrides.push_back("seed=" + std::to_string(*flags.seed));
  if (flags.samples) {
    overrides.push_back("generation.samples=" + std::to_string(*flags.samples));
  }
  return hiro::PipelineConfig::Load(flags.config, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical opinion index: learn, retrieve, summarize"};
  app.set_version_flag("--version", std::string(hiro::kToolVersion));
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Pipeline config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Override the config seed");
  app.add_option("--set", flags.overrides,
                 "Override a config value, e.g. --set retrieval.k=4")
      ->allow_extra_args(false);

  std::vector<std::pair<CLI::App*, std::optional<hiro::Stage>>> commands;
  for (hiro::Stage stage : hiro::AllStages()) {
    CLI::App* sub = app.add_subcommand(hiro::ToString(stage),
                                       "Run the " + hiro::ToString(stage) +
                                           " stage");
    if (stage == hiro::Stage::kSummarize) {
      sub->add_option("--samples", flags.samples,
                      "Summaries to draw per entity (one file each)");
    }
    commands.push_back({sub, stage});
  }
  CLI::App* run = app.add_subcommand("run", "Run every stage in order");
  run->add_option("--samples", flags.samples,
                  "Summaries to draw per entity (one file each)");
  commands.push_back({run, std::nullopt});

  CLI11_PARSE(app, argc, argv);

  try {
    const hiro::PipelineConfig config = LoadConfig(flags);
    for (const auto& [sub, stage] : commands) {
      if (!sub->parsed()) continue;
      if (stage) {
        hiro::RunStage(*stage, config);
        std::cerr << "hiro: " << hiro::ToString(*stage) << " done\n";
      } else {
        for (hiro::Stage s : hiro::AllStages()) {
          hiro::RunStage(s, config);
          std::cerr << "hiro: " << hiro::ToString(s) << " done\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "hiro: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
