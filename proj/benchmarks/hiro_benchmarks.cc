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

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>
#include <Eigen/Core>

#include "hiro/common.h"
#include "hiro/corpus.h"
#include "hiro/pairing.h"
#include "hiro/quantizer.h"
#include "hiro/retriever.h"

namespace hiro {
namespace {

QuantizerModel Model(int k, int d, int dim) {
  QuantizerConfig cfg;
  cfg.K = k;
  cfg.D = d;
  cfg.dim = dim;
  return QuantizerModel::Initialize(cfg, 1);
}

Eigen::VectorXd RandomVector(int dim, Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = nd(rng);
  return v;
}

// Greedy path lookup at the default hierarchy shape.
void BM_Encode(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const QuantizerModel m = Model(12, 12, dim);
  Rng rng(2);
  const Eigen::VectorXd z = RandomVector(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Encode(m, z));
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(768);

// One loss and gradient evaluation; range is the batch size.
void BM_ContrastiveLoss(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  const int dim = 64;
  QuantizerModel m = Model(12, 6, dim);
  Rng rng(3);
  std::vector<ContrastiveExample> batch;
  for (int i = 0; i < b; ++i) {
    const Eigen::VectorXd q = RandomVector(dim, rng);
    batch.push_back({q, q + 0.1 * RandomVector(dim, rng), 1.0});
  }
  BoolMatrix mask(2 * static_cast<std::size_t>(b));
  for (int i = 0; i < 2 * b; ++i) {
    for (int j = 0; j < 2 * b; ++j) mask.set(i, j, i != j);
  }
  const LossNoise noise = DrawLossNoise(m.config, batch.size(), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ContrastiveLoss(m, batch, mask, 1.0, noise));
  }
}
BENCHMARK(BM_ContrastiveLoss)->Arg(32)->Arg(128);

// Top-k retrieval for one entity among `range` entities of 50 reviews.
void BM_SelectTopK(benchmark::State& state) {
  const int entities = static_cast<int>(state.range(0));
  Rng rng(4);
  std::uniform_int_distribution<int> code(0, 7);
  std::vector<Assignment> as;
  for (int e = 0; e < entities; ++e) {
    for (int r = 0; r < 50; ++r) {
      const std::string rid = "e" + std::to_string(e) + "/r" + std::to_string(r);
      for (int s = 0; s < 4; ++s) {
        Path p;
        for (int d = 0; d < 4; ++d) p.push_back(code(rng));
        as.push_back({rid + "/" + std::to_string(s), "e" + std::to_string(e), rid, p});
      }
    }
  }
  const IndexedCorpus idx = IndexedCorpus::FromAssignments(as);
  for (auto _ : state) benchmark::DoNotOptimize(SelectTopK(idx, "e0", 8, 6.0));
}
BENCHMARK(BM_SelectTopK)->Arg(10)->Arg(100);

// Vocabulary, idf and vectors for `range` reviews of five sentences.
void BM_TfidfBuild(benchmark::State& state) {
  const int reviews = static_cast<int>(state.range(0));
  const std::vector<std::string> words = {"pool",  "staff", "room",  "clean",
                                          "rude",  "great", "noisy", "breakfast",
                                          "view",  "bed",   "warm",  "location"};
  Rng rng(5);
  std::string jsonl;
  for (int r = 0; r < reviews; ++r) {
    std::string text;
    for (int s = 0; s < 5; ++s) {
      text += " The";
      for (int w = 0; w < 8; ++w) text += " " + words[rng() % words.size()];
      text += ".";
    }
    jsonl += R"({"entity_id": "e", "review_id": "r)" + std::to_string(r) +
             R"(", "text": ")" + text.substr(1) + "\"}\n";
  }
  const Corpus corpus = IngestJsonlString(jsonl);
  for (auto _ : state) benchmark::DoNotOptimize(Vectorizer::Build(corpus));
}
BENCHMARK(BM_TfidfBuild)->Arg(100)->Arg(1000);

}  // namespace
}  // namespace hiro

BENCHMARK_MAIN();
