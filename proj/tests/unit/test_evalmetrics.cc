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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "hiro/corpus.h"
#include "hiro/evalmetrics.h"
#include "hiro/nli.h"
#include "support/oracles.h"

namespace hiro {
namespace {

using Strings = std::vector<std::string>;

TEST_CASE("sap is a linear combination") {
  CHECK(Sap(36.3, 20.5, 0.5) == doctest::Approx(26.05).epsilon(1e-12));
  CHECK(Sap(41.3, 34.3, 0.5) == doctest::Approx(24.15).epsilon(1e-12));
  CHECK(Sap(12.5, 0.0, 0.5) == 12.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  for (int i = 0; i < 100; ++i) {
    const double p = u(rng), g = u(rng), p2 = u(rng), g2 = u(rng), a = u(rng) / 50;
    CHECK(std::abs(Sap(p, g, a) + Sap(p2, g2, a) - Sap(p + p2, g + g2, a)) < 1e-9);
  }
}

// Review 4 shares only "the" with the first summary sentence.
std::vector<Strings> PrevalenceReviews() {
  return {{"The pool was great."},
          {"Breakfast was cold.", "The pool was great fun."},
          {"Pool was great."},
          {"The staff were rude."}};
}

TEST_CASE("prevalence counts supporting reviews per sentence") {
  const auto reviews = PrevalenceReviews();
  JaccardEntailment jaccard(0.5);
  const Strings pool = {"The pool was great."};
  CHECK(Prevalence(pool, reviews, jaccard) == doctest::Approx(0.75));
  // Second sentence holds in review 4 only: (0.75 + 0.25) / 2.
  const Strings both = {"The pool was great.", "Staff were rude."};
  CHECK(Prevalence(both, reviews, jaccard) == doctest::Approx(0.5));

  CHECK(Prevalence(both, reviews, ConstantEntailment(1.0)) == 1.0);
  CHECK(Prevalence(both, reviews, ConstantEntailment(0.0)) == 0.0);
  CHECK_THROWS_AS(Prevalence(both, std::vector<Strings>{}, jaccard), Error);

  auto shuffled = reviews;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    NliEvalOptions opts;
    opts.parallelism = 1 + i % 3;
    CHECK(Prevalence(both, shuffled, jaccard, opts) == doctest::Approx(0.5));
  }
}

TEST_CASE("genericness counts other entities whose summary entails") {
  JaccardEntailment jaccard(0.5);
  // Only "The pool was great." is shared, between the first two entities.
  const std::vector<Strings> summaries = {
      {"The pool was great."},
      {"The pool was great.", "Rooms were small."},
      {"Breakfast was cold."}};
  const std::vector<double> g = Genericness(summaries, jaccard);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g[2] == 0.0);

  const std::vector<Strings> reordered = {summaries[2], summaries[0], summaries[1]};
  const std::vector<double> r = Genericness(reordered, jaccard);
  CHECK(r[0] == g[2]);
  CHECK(r[1] == g[0]);
  CHECK(r[2] == g[1]);

  const std::vector<Strings> same(5, Strings{"Nice view.", "Clean room."});
  for (double v : Genericness(same, jaccard)) CHECK(v == 4.0);
  for (double v : Genericness(same, ConstantEntailment(0.0))) CHECK(v == 0.0);
  CHECK_THROWS_AS(Genericness(std::vector<Strings>{{"Alone."}}, jaccard), Error);
}

TEST_CASE("attribution support takes the best cluster") {
  JaccardEntailment jaccard(0.5);
  std::vector<AttributedSentence> summary = {
      {"The pool was great.",
       {{"The pool was great!", "Pool was great.", "Staff were rude.",
         "Rooms were small."}}},
      {"Staff were rude.", {{"Staff were rude.", "Breakfast was cold.", "Nice view."}}}};
  AttributionResult r = AttributionSupport(summary, jaccard);
  CHECK(r.partial_pct == doctest::Approx(100.0));
  CHECK(r.majority_pct == doctest::Approx(50.0));

  // Document-level evidence: the second cluster lifts the second sentence.
  summary[1].evidence.push_back({"Staff were rude.", "The staff were rude."});
  r = AttributionSupport(summary, jaccard);
  CHECK(r.majority_pct == doctest::Approx(100.0));

  std::vector<AttributedSentence> self = {{"Quiet room.", {{"Quiet room."}}}};
  r = AttributionSupport(self, jaccard);
  CHECK(r.partial_pct == 100.0);
  CHECK(r.majority_pct == 100.0);
  r = AttributionSupport(self, ConstantEntailment(0.0));
  CHECK(r.partial_pct == 0.0);
  CHECK(r.majority_pct == 0.0);

  std::vector<AttributedSentence> bare = {{"No evidence.", {}}};
  CHECK_THROWS_AS(AttributionSupport(bare, jaccard), Error);
}

Corpus BlockCorpus() {
  return IngestJsonlString(
      R"({"entity_id": "e", "review_id": "r", "text": "Pool warm. Pool warm. Staff rude. Staff rude."})"
      "\n");
}

TEST_CASE("orthogonal blocks give purity one and colocation zero") {
  const Corpus corpus = BlockCorpus();
  REQUIRE(corpus.sentences().size() == 4);
  const Vectorizer v = Vectorizer::Build(corpus);
  const std::vector<std::vector<std::size_t>> clusters = {{0, 1}, {2, 3}};
  const ClusterQuality q = EvaluateClusters(clusters, TfidfPairSimilarity(v), 1);
  CHECK(q.purity == doctest::Approx(1.0));
  CHECK(q.colocation == doctest::Approx(0.0));
  CHECK(q.quality == doctest::Approx(1.0));
  CHECK(q.purity_pairs == 2);
  CHECK(q.colocation_pairs == 4);
  CHECK_FALSE(q.sampled);
}

TEST_CASE("a duplicated cluster has colocation equal to purity") {
  const Corpus corpus = IngestJsonl(HIRO_FIXTURES_DIR "/toy/reviews.jsonl");
  const Vectorizer v = Vectorizer::Build(corpus);
  const std::vector<std::size_t> c = {0, 1, 2, 3, 4};
  const std::vector<std::vector<std::size_t>> clusters = {c, c};
  const ClusterQuality q = EvaluateClusters(clusters, TfidfPairSimilarity(v), 1);
  CHECK(q.colocation == doctest::Approx(q.purity).epsilon(1e-12));
}

TEST_CASE("cluster quality matches the exhaustive cosine oracle") {
  const Corpus corpus = IngestJsonl(HIRO_FIXTURES_DIR "/toy/reviews.jsonl");
  const Vectorizer v = Vectorizer::Build(corpus);
  const auto oracle = testing::OracleTfidf(corpus);
  const std::size_t n = corpus.sentences().size();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> items(n);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), rng);
    // Three clusters, the first two with at least two members.
    const std::size_t cut1 = 2 + rng() % 4, cut2 = cut1 + 2 + rng() % 4;
    std::vector<std::vector<std::size_t>> clusters = {
        {items.begin(), items.begin() + cut1},
        {items.begin() + cut1, items.begin() + cut2},
        {items.begin() + cut2, items.end()}};
    double in_sum = 0, out_sum = 0;
    int in_n = 0, out_n = 0;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a; b < 3; ++b) {
        for (std::size_t i = 0; i < clusters[a].size(); ++i) {
          for (std::size_t j = (a == b ? i + 1 : 0); j < clusters[b].size(); ++j) {
            const double s =
                testing::OracleCosine(oracle[clusters[a][i]], oracle[clusters[b][j]]);
            if (a == b) {
              in_sum += s;
              ++in_n;
            } else {
              out_sum += s;
              ++out_n;
            }
          }
        }
      }
    }
    const ClusterQuality q = EvaluateClusters(clusters, TfidfPairSimilarity(v), 5);
    CHECK(q.purity == doctest::Approx(in_sum / in_n).epsilon(1e-9));
    CHECK(q.colocation == doctest::Approx(out_sum / out_n).epsilon(1e-9));
    CHECK(std::abs(q.quality - (q.purity - q.colocation)) < 1e-9);
  }
}

TEST_CASE("sampled cluster quality agrees with the exhaustive value") {
  // Deterministic symmetric similarity in [0, 1).
  auto sim = [](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    std::mt19937_64 g(a * 1000003 + b);
    return std::uniform_real_distribution<double>(0, 1)(g);
  };
  std::vector<std::vector<std::size_t>> clusters(4);
  for (std::size_t i = 0; i < 120; ++i) clusters[i % 4].push_back(i);
  const ClusterQuality exact = EvaluateClusters(clusters, sim, 1);
  REQUIRE_FALSE(exact.sampled);
  // Uniform(0, 1) pair values: standard error is sqrt(1/12 / m).
  const std::size_t m = 400;
  const double se = std::sqrt(1.0 / 12.0 / m);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ClusterQuality est = EvaluateClusters(clusters, sim, seed, m);
    CHECK(est.sampled);
    CHECK(est.purity_pairs == m);
    CHECK(est.colocation_pairs == m);
    CHECK(std::abs(est.purity - exact.purity) < 3 * se);
    CHECK(std::abs(est.colocation - exact.colocation) < 3 * se);
  }
}

TEST_CASE("cluster quality rejects degenerate clusterings") {
  auto one = [](std::size_t, std::size_t) { return 1.0; };
  const std::vector<std::vector<std::size_t>> singletons = {{0}, {1}, {2}};
  CHECK_THROWS_AS(EvaluateClusters(singletons, one, 0), Error);
  const std::vector<std::vector<std::size_t>> lone = {{0, 1, 2}};
  CHECK_THROWS_AS(EvaluateClusters(lone, one, 0), Error);
}

TEST_CASE("adjusted rand index examples") {
  const std::vector<int> a = {0, 0, 1, 1, 2};
  CHECK(AdjustedRandIndex(a, a) == doctest::Approx(1.0));
  const std::vector<int> together = {0, 0, 0, 0}, apart = {0, 1, 2, 3};
  CHECK(AdjustedRandIndex(together, apart) == doctest::Approx(0.0));
  CHECK(AdjustedRandIndex(std::vector<int>{1, 1, 0}, std::vector<int>{5, 5, 9}) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(AdjustedRandIndex(std::vector<int>{0}, std::vector<int>{0}), Error);
  CHECK_THROWS_AS(AdjustedRandIndex(std::vector<int>{0, 1}, std::vector<int>{0}),
                  Error);

  // Keyed form drops items missing from either side.
  const std::map<std::string, int> x = {{"a", 0}, {"b", 0}, {"c", 1}, {"z", 4}};
  const std::map<std::string, int> y = {{"a", 3}, {"b", 3}, {"c", 7}, {"q", 1}};
  CHECK(AdjustedRandIndex(x, y) == doctest::Approx(1.0));
}

TEST_CASE("adjusted rand index matches the pair-counting oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const int ka = 1 + static_cast<int>(rng() % 4), kb = 1 + static_cast<int>(rng() % 4);
    std::vector<int> a(n), b(n);
    for (auto& v : a) v = static_cast<int>(rng() % ka);
    for (auto& v : b) v = static_cast<int>(rng() % kb);
    const double expected = testing::OracleAri(a, b);
    CHECK(AdjustedRandIndex(a, b) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(AdjustedRandIndex(b, a) == doctest::Approx(expected).epsilon(1e-9));
    // Renaming labels changes nothing.
    std::vector<int> renamed(n);
    for (std::size_t i = 0; i < n; ++i) renamed[i] = 100 - 7 * a[i];
    CHECK(AdjustedRandIndex(renamed, b) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(AdjustedRandIndex(a, renamed) == doctest::Approx(1.0));
  }
}

std::size_t Lcs(const Strings& a, const Strings& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1
                                     : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

TEST_CASE("rouge examples") {
  CHECK(Rouge2F1("the cat sat", "the cat ran") == doctest::Approx(0.5));
  CHECK(Rouge2F1("The pool was great.", "the pool was great") == doctest::Approx(1.0));
  CHECK(RougeLF1("The pool was great.", "the pool was great") == doctest::Approx(1.0));
  CHECK(Rouge2F1("red blue", "green yellow") == 0.0);
  CHECK(RougeLF1("red blue", "green yellow") == 0.0);
  // "the cat ran" LCS is 2 of 3 on each side.
  CHECK(RougeLF1("the cat sat", "the cat ran") == doctest::Approx(2.0 / 3.0));

  const Strings refs = {"green yellow", "the cat ran"};
  CHECK(Rouge("the cat sat", refs, RougeVariant::kR2F1) == doctest::Approx(0.5));
  CHECK(Rouge("the cat sat", Strings{}, RougeVariant::kRLF1) == 0.0);
}

TEST_CASE("rouge agrees with independent oracles on random texts") {
  std::mt19937_64 rng(8);
  const Strings words = {"the", "pool", "was", "warm", "staff", "rude"};
  auto text = [&] {
    std::string s;
    const int len = 1 + static_cast<int>(rng() % 7);
    for (int i = 0; i < len; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = text(), b = text();
    CHECK(Rouge2F1(a, b) == doctest::Approx(Rouge2F1(b, a)));
    const Strings ta = Tokenize(a), tb = Tokenize(b);
    if (ta.size() >= 2 && tb.size() >= 2) {
      CHECK(Rouge2F1(a, b) == doctest::Approx(testing::OracleRouge2(a, b)));
    }
    const double l = static_cast<double>(Lcs(ta, tb));
    const double expected = l == 0 ? 0.0 : 2 * l / static_cast<double>(ta.size() + tb.size());
    CHECK(RougeLF1(a, b) == doctest::Approx(expected));
    CHECK(Rouge2F1(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("eval report aggregates and round-trips") {
  EvalReport r;
  r.alpha_sap = 0.5;
  r.nli_backend = "mock:jaccard";
  r.similarity_mode = "tfidf";
  EntityEval a{"h1", 0.5, 1.0, 0.0, 0.25, std::nullopt, 100.0, 50.0};
  EntityEval b{"h2", 0.25, 0.0, 0.25, 0.75, 0.5, 50.0, 0.0};
  a.sap = Sap(a.prevalence, a.genericness, r.alpha_sap);
  r.entities = {a, b};
  r.depth_quality[1] = {0.75, 0.25, 0.5, 10, 20, false};
  r.ari = 0.125;
  r.Aggregate();
  CHECK(r.aggregate.prevalence == doctest::Approx(0.375));
  CHECK(r.aggregate.sap ==
        doctest::Approx(Sap(r.aggregate.prevalence, r.aggregate.genericness, 0.5)));
  CHECK(r.aggregate.majority_support_pct == doctest::Approx(25.0));

  const EvalReport back = EvalReport::FromJson(r.ToJson());
  CHECK(back.ToJson() == r.ToJson());
  CHECK(back.ToCsv() == r.ToCsv());
  CHECK_FALSE(back.entities[0].rougeL_f1.has_value());
  const std::string csv = r.ToCsv();
  CHECK(csv.rfind(
            "entity_id,prevalence,genericness,sap,rouge2_f1,rougeL_f1,"
            "partial_support_pct,majority_support_pct\n",
            0) == 0);
  CHECK(csv.find("\nh1,0.500000,1.000000,0.000000,0.250000,,100.000000,50.000000\n") != std::string::npos);
  CHECK_THROWS_AS(EvalReport::FromJson(nlohmann::json::parse("{\"x\": 1}")), Error);
}

}  // namespace
}  // namespace hiro
