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

#ifndef HIRO_PAIRING_H_
#define HIRO_PAIRING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hiro/corpus.h"
#include "hiro/nli.h"

namespace hiro {

// Positive training pair (x, x+). `rho` is their tf-idf similarity and
// weights the pair's contribution to the contrastive loss.
struct PositivePair {
  std::string query_id;
  std::string target_id;
  double rho = 0.0;

  friend bool operator==(const PositivePair&, const PositivePair&) = default;
};

struct PairingConfig {
  double cand_threshold = 0.4;
  // Candidates more similar than this are near-duplicates and skipped.
  double cand_upper = 0.95;
  int k_candidates = 20;
  double entail_threshold = 0.5;
  std::size_t pair_budget = 100000;
  int max_retries = 3;
  int parallelism = 1;
};

struct Candidate {
  std::size_t sentence = 0;
  double sim = 0.0;
};

// Up to k sentences from other reviews with cand_threshold <= sim <=
// cand_upper, by descending similarity (ties: corpus order).
std::vector<Candidate> MineCandidates(std::size_t query, const Corpus& corpus,
                                      const Vectorizer& vectorizer,
                                      const PairingConfig& config);

// Checks query -> candidate entailment and keeps the entailed candidates.
// `verdicts`, when given, receives every verdict in candidate order.
std::vector<PositivePair> FilterEntailed(
    std::size_t query, std::span<const Candidate> candidates,
    const Corpus& corpus, const Vectorizer& vectorizer,
    const EntailmentClient& nli, const PairingConfig& config,
    std::vector<EntailmentVerdict>* verdicts = nullptr);

// Samples queries uniformly without replacement until `pair_budget` pairs
// are found or the corpus is exhausted. Output is sorted by (query id,
// target id) and independent of `parallelism`.
std::vector<PositivePair> MinePairs(const Corpus& corpus,
                                    const Vectorizer& vectorizer,
                                    const EntailmentClient& nli,
                                    const PairingConfig& config,
                                    std::uint64_t seed);

// Dense square boolean matrix.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  explicit BoolMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const {
    return cells_[i * n_ + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    cells_[i * n_ + j] = v ? 1 : 0;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

// mask(i, j) is true iff i != j and sim(i, j) < neg_threshold.
BoolMatrix NegativeMask(std::size_t n,
                        const std::function<double(std::size_t, std::size_t)>& sim,
                        double neg_threshold);
BoolMatrix NegativeMask(std::span<const SparseVector* const> batch,
                        double neg_threshold);

std::string PairsToJsonl(std::span<const PositivePair> pairs);
std::vector<PositivePair> PairsFromJsonl(std::string_view text);

}  // namespace hiro

#endif  // HIRO_PAIRING_H_
