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

// Planted topic-tree corpus used to compare the trained quantizer against
// the residual k-means baseline on index quality per depth.

#ifndef HIRO_TESTS_SUPPORT_HIERARCHY_EXPERIMENT_H_
#define HIRO_TESTS_SUPPORT_HIERARCHY_EXPERIMENT_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiro/corpus.h"
#include "hiro/embeddings.h"
#include "hiro/evalmetrics.h"
#include "hiro/nli.h"
#include "hiro/pairing.h"
#include "hiro/quantizer.h"

namespace hiro::testing {

struct HierarchySettings {
  int branching = 3;          // children per node, 3 levels deep
  int words_per_node = 5;     // private vocabulary of every tree node
  int words_per_level = 2;    // drawn from each node on a sentence's path
  int entities = 6;
  int reviews = 10;
  int sentences_per_review = 5;
  int embedding_dim = 32;
  double min_overlap = 0.2;   // Jaccard entailment mock
  QuantizerConfig quantizer;

  HierarchySettings() {
    quantizer.K = 3;
    quantizer.D = 3;
    quantizer.dim = 32;
    quantizer.lr = 1e-2;
    quantizer.batch_size = 64;
    quantizer.steps = 1500;
    quantizer.omega = 10;
    quantizer.gamma_temp = 1000;
  }
};

struct HierarchyOutcome {
  // depth -> purity minus colocation
  std::map<int, double> trained;
  std::map<int, double> kmeans;
  std::size_t sentences = 0;
  std::size_t pairs = 0;
};

// Sentences name their leaf through words of every node on its path, so
// tf-idf similarity is highest within a leaf and decays with tree distance.
inline Corpus PlantedTopicCorpus(std::uint64_t seed, const HierarchySettings& s) {
  Rng rng(seed);
  const int b = s.branching;
  auto word = [](int level, int node, int i) {
    return "w" + std::to_string(level) + "n" + std::to_string(node) + "x" +
           std::to_string(i);
  };
  std::uniform_int_distribution<int> pick_leaf(0, b * b * b - 1);
  std::string jsonl;
  for (int e = 0; e < s.entities; ++e) {
    for (int r = 0; r < s.reviews; ++r) {
      std::string text;
      for (int k = 0; k < s.sentences_per_review; ++k) {
        const int leaf = pick_leaf(rng);
        const int nodes[3] = {leaf / (b * b), leaf / b, leaf};
        std::vector<std::string> words;
        for (int level = 0; level < 3; ++level) {
          std::vector<int> idx(s.words_per_node);
          for (int i = 0; i < s.words_per_node; ++i) idx[i] = i;
          std::shuffle(idx.begin(), idx.end(), rng);
          for (int i = 0; i < s.words_per_level; ++i) {
            words.push_back(word(level, nodes[level], idx[i]));
          }
        }
        std::shuffle(words.begin(), words.end(), rng);
        words[0][0] = 'W';
        std::string sentence;
        for (const auto& w : words) sentence += (sentence.empty() ? "" : " ") + w;
        text += (text.empty() ? "" : " ") + sentence + ".";
      }
      nlohmann::json line = {{"entity_id", "e" + std::to_string(e)},
                             {"review_id", "r" + std::to_string(r)},
                             {"text", text}};
      jsonl += line.dump() + "\n";
    }
  }
  return IngestJsonlString(jsonl);
}

// Quality of the clusters formed by each depth prefix of `paths`.
inline std::map<int, double> DepthQuality(const std::vector<Path>& paths, int depth,
                                          const Vectorizer& vectorizer) {
  std::map<int, double> out;
  for (int d = 1; d <= depth; ++d) {
    std::map<Path, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      groups[paths[i].Prefix(static_cast<std::size_t>(d))].push_back(i);
    }
    std::vector<std::vector<std::size_t>> clusters;
    for (auto& [p, members] : groups) clusters.push_back(std::move(members));
    try {
      out[d] = EvaluateClusters(clusters, TfidfPairSimilarity(vectorizer), 0).quality;
    } catch (const Error&) {
      out[d] = 0.0;  // one cluster or all singletons: no structure
    }
  }
  return out;
}

inline HierarchyOutcome RunHierarchyExperiment(std::uint64_t seed,
                                               const HierarchySettings& s) {
  const Corpus corpus = PlantedTopicCorpus(seed, s);
  const Vectorizer vectorizer = Vectorizer::Build(corpus);
  const EmbeddingTable table =
      EmbedCorpus(corpus, MockEmbeddingProvider(s.embedding_dim, seed));

  JaccardEntailment nli(s.min_overlap);
  PairingConfig pairing;
  const auto pairs = MinePairs(corpus, vectorizer, nli, pairing, seed);

  QuantizerConfig qc = s.quantizer;
  qc.dim = s.embedding_dim;
  const LexicalSimilarity sim = [&](const std::string& a, const std::string& b) {
    return vectorizer.Sim(corpus.SentenceIndex(a), corpus.SentenceIndex(b));
  };
  const TrainResult trained =
      Train(QuantizerModel::Initialize(qc, seed), pairs, table, sim, seed);

  std::vector<Eigen::VectorXd> points;
  for (const auto& sentence : corpus.sentences()) {
    points.push_back(table.GetVector(sentence.id));
  }
  const QuantizerModel kmeans = FitResidualKMeans(points, qc.K, qc.D, seed);

  std::vector<Path> trained_paths, kmeans_paths;
  for (const auto& p : points) {
    trained_paths.push_back(Encode(trained.model, p));
    kmeans_paths.push_back(Encode(kmeans, p));
  }
  HierarchyOutcome out;
  out.trained = DepthQuality(trained_paths, qc.D, vectorizer);
  out.kmeans = DepthQuality(kmeans_paths, qc.D, vectorizer);
  out.sentences = points.size();
  out.pairs = pairs.size();
  return out;
}

}  // namespace hiro::testing

#endif  // HIRO_TESTS_SUPPORT_HIERARCHY_EXPERIMENT_H_
