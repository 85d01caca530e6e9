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

// Random indexed corpora and an exhaustive subpath scorer that uses exact
// integer arithmetic, independent of the retriever's bookkeeping.

#ifndef HIRO_TESTS_SUPPORT_RETRIEVAL_ORACLE_H_
#define HIRO_TESTS_SUPPORT_RETRIEVAL_ORACLE_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hiro/quantizer.h"
#include "hiro/retriever.h"

namespace hiro::testing {

// Sentence `ordinal` of review `entity/review`.
inline Assignment HandAssignment(const std::string& entity,
                                 const std::string& review, int ordinal,
                                 Path path) {
  const std::string rid = entity + "/" + review;
  return {rid + "/" + std::to_string(ordinal), entity, rid, std::move(path)};
}

// Entities with 2, 4 and 4 reviews; subpath [0] appears in 1, 1 and 3 of
// them, so tps are 0.5, 0.25 and 0.75.
inline IndexedCorpus ThreeEntityIndex() {
  auto a = HandAssignment;
  return IndexedCorpus::FromAssignments({
      a("a", "1", 0, {0, 1}), a("a", "2", 0, {1, 1}),
      a("b", "1", 0, {0, 0}), a("b", "2", 0, {1, 0}),
      a("b", "3", 0, {1, 0}), a("b", "4", 0, {1, 1}),
      a("c", "1", 0, {0, 0}), a("c", "2", 0, {0, 1}),
      a("c", "3", 0, {0, 1}), a("c", "4", 0, {1, 0}),
  });
}

// Paths come from greedy encoding of random embeddings against random fixed
// codebooks, so subpath sharing looks like a real index. Entities hold at
// most 12 reviews to keep the oracle's common denominator small.
inline std::vector<Assignment> RandomAssignments(std::uint64_t seed,
                                                 int* depth = nullptr) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_k(2, 3), pick_d(1, 3),
      pick_entities(1, 10), pick_reviews(1, 12), pick_sentences(1, 4);
  std::normal_distribution<double> nd;
  QuantizerModel m;
  m.config.K = pick_k(rng);
  m.config.D = pick_d(rng);
  m.config.dim = 4;
  m.projection = Eigen::MatrixXd::Identity(4, 4);
  for (int d = 0; d < m.config.D; ++d) {
    Eigen::MatrixXd c(m.config.K, 4);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = nd(rng) / (d + 1);
    m.codebooks.push_back(c);
  }
  if (depth != nullptr) *depth = m.config.D;

  std::vector<Assignment> out;
  const int entities = pick_entities(rng);
  for (int e = 0; e < entities; ++e) {
    const int reviews = pick_reviews(rng);
    for (int r = 0; r < reviews; ++r) {
      const int sentences = pick_sentences(rng);
      for (int s = 0; s < sentences; ++s) {
        Eigen::VectorXd z(4);
        for (int k = 0; k < 4; ++k) z[k] = nd(rng);
        const std::string rid = "e" + std::to_string(e) + "/r" + std::to_string(r);
        out.push_back({rid + "/" + std::to_string(s), "e" + std::to_string(e), rid,
                       Encode(m, z)});
      }
    }
  }
  return out;
}

struct OracleScore {
  Path subpath;
  // score = num / den exactly.
  __int128 num = 0;
  __int128 den = 1;
  double value = 0.0;
};

// Ranks every subpath occurring in `entity`'s reviews by exact score, then
// depth, then codes. `alpha` must be a non-negative integer.
inline std::vector<OracleScore> OracleRanking(
    const std::vector<Assignment>& assignments, const std::string& entity,
    std::int64_t alpha) {
  // entity -> review -> set of subpaths in that review
  std::map<std::string, std::map<std::string, std::set<Path>>> reviews;
  for (const Assignment& a : assignments) {
    auto& q = reviews[a.entity_id][a.review_id];
    for (std::size_t d = 1; d <= a.path.depth(); ++d) q.insert(a.path.Prefix(d));
  }
  std::int64_t lcm = 1;
  for (const auto& [e, rs] : reviews) {
    lcm = std::lcm(lcm, static_cast<std::int64_t>(rs.size()));
  }
  auto count = [&](const std::string& e, const Path& p) {
    std::int64_t c = 0;
    for (const auto& [r, q] : reviews.at(e)) c += q.count(p);
    return c;
  };

  std::set<Path> candidates;
  for (const auto& [r, q] : reviews.at(entity)) candidates.insert(q.begin(), q.end());
  const auto n_entities = static_cast<std::int64_t>(reviews.size());
  const auto n_own = static_cast<std::int64_t>(reviews.at(entity).size());

  std::vector<OracleScore> out;
  for (const Path& p : candidates) {
    // sum_e tp = P / lcm
    std::int64_t sum = 0;
    for (const auto& [e, rs] : reviews) {
      sum += count(e, p) * (lcm / static_cast<std::int64_t>(rs.size()));
    }
    // score = (c / n) * (alpha + E) / (alpha + P / lcm)
    OracleScore s;
    s.subpath = p;
    s.num = static_cast<__int128>(count(entity, p)) * (alpha + n_entities) * lcm;
    s.den = static_cast<__int128>(n_own) * (alpha * lcm + sum);
    s.value = static_cast<double>(s.num) / static_cast<double>(s.den);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const OracleScore& a, const OracleScore& b) {
    const __int128 lhs = a.num * b.den, rhs = b.num * a.den;
    if (lhs != rhs) return lhs > rhs;
    if (a.subpath.depth() != b.subpath.depth()) {
      return a.subpath.depth() < b.subpath.depth();
    }
    return a.subpath < b.subpath;
  });
  return out;
}

}  // namespace hiro::testing

#endif  // HIRO_TESTS_SUPPORT_RETRIEVAL_ORACLE_H_
