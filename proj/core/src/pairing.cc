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

#include "hiro/pairing.h"

#include <algorithm>
#include <future>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hiro {

std::vector<Candidate> MineCandidates(std::size_t query, const Corpus& corpus,
                                      const Vectorizer& vectorizer,
                                      const PairingConfig& config) {
  const std::size_t own_review = corpus.ReviewOf(query);
  std::vector<Candidate> out;
  for (const auto& [sentence, sim] :
       vectorizer.SimilarSentences(vectorizer.vector(query))) {
    if (sentence == query || corpus.ReviewOf(sentence) == own_review) continue;
    if (sim < config.cand_threshold || sim > config.cand_upper) continue;
    out.push_back({sentence, sim});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.sim > b.sim;
                   });
  if (out.size() > static_cast<std::size_t>(std::max(config.k_candidates, 0))) {
    out.resize(static_cast<std::size_t>(config.k_candidates));
  }
  return out;
}

std::vector<PositivePair> FilterEntailed(
    std::size_t query, std::span<const Candidate> candidates,
    const Corpus& corpus, const Vectorizer& vectorizer,
    const EntailmentClient& nli, const PairingConfig& config,
    std::vector<EntailmentVerdict>* verdicts) {
  const Sentence& q = corpus.sentences()[query];
  std::vector<PositivePair> pairs;
  for (const Candidate& c : candidates) {
    const Sentence& t = corpus.sentences()[c.sentence];
    const double p = PEntailWithRetry(nli, q.text, t.text, config.max_retries,
                                      "entailment check for pair (" + q.id +
                                          ", " + t.id + ")");
    const EntailmentLabel label = Classify(p, config.entail_threshold);
    if (verdicts != nullptr) verdicts->push_back({q.id, t.id, p, label});
    if (label == EntailmentLabel::kEntailed) {
      pairs.push_back({q.id, t.id, vectorizer.Sim(query, c.sentence)});
    }
  }
  return pairs;
}

std::vector<PositivePair> MinePairs(const Corpus& corpus,
                                    const Vectorizer& vectorizer,
                                    const EntailmentClient& nli,
                                    const PairingConfig& config,
                                    std::uint64_t seed) {
  std::vector<std::size_t> order(corpus.sentences().size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto mine_one = [&](std::size_t query) {
    const auto candidates = MineCandidates(query, corpus, vectorizer, config);
    return FilterEntailed(query, candidates, corpus, vectorizer, nli, config);
  };

  const std::size_t workers =
      static_cast<std::size_t>(std::max(config.parallelism, 1));
  const std::size_t chunk = std::max<std::size_t>(64, 8 * workers);

  std::vector<PositivePair> pairs;
  for (std::size_t begin = 0;
       begin < order.size() && pairs.size() < config.pair_budget;
       begin += chunk) {
    const std::size_t end = std::min(order.size(), begin + chunk);
    std::vector<std::vector<PositivePair>> found(end - begin);
    if (workers == 1) {
      for (std::size_t i = begin; i < end; ++i) {
        found[i - begin] = mine_one(order[i]);
      }
    } else {
      std::vector<std::future<void>> jobs;
      for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t i = begin + w; i < end; i += workers) {
            found[i - begin] = mine_one(order[i]);
          }
        }));
      }
      for (auto& job : jobs) job.get();
    }
    for (auto& f : found) {
      for (auto& p : f) {
        if (pairs.size() >= config.pair_budget) break;
        pairs.push_back(std::move(p));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const PositivePair& a, const PositivePair& b) {
              return std::tie(a.query_id, a.target_id) <
                     std::tie(b.query_id, b.target_id);
            });
  return pairs;
}

BoolMatrix NegativeMask(
    std::size_t n, const std::function<double(std::size_t, std::size_t)>& sim,
    double neg_threshold) {
  BoolMatrix mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool negative = sim(i, j) < neg_threshold;
      mask.set(i, j, negative);
      mask.set(j, i, negative);
    }
  }
  return mask;
}

BoolMatrix NegativeMask(std::span<const SparseVector* const> batch,
                        double neg_threshold) {
  return NegativeMask(
      batch.size(),
      [&](std::size_t i, std::size_t j) {
        return TfidfSim(*batch[i], *batch[j]);
      },
      neg_threshold);
}

std::string PairsToJsonl(std::span<const PositivePair> pairs) {
  std::string out;
  for (const PositivePair& p : pairs) {
    nlohmann::json line = {
        {"query_id", p.query_id}, {"target_id", p.target_id}, {"rho", p.rho}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<PositivePair> PairsFromJsonl(std::string_view text) {
  std::vector<PositivePair> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      pairs.push_back({obj.at("query_id").get<std::string>(),
                       obj.at("target_id").get<std::string>(),
                       obj.at("rho").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace hiro
