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
#include <atomic>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "hiro/common.h"
#include "hiro/generation.h"
#include "support/oracles.h"

namespace hiro {
namespace {

class CountingLlm final : public LlmClient {
 public:
  std::string Complete(const LlmRequest& request) const override {
    std::lock_guard<std::mutex> lock(mu_);
    prompts_.push_back(request.prompt);
    last_max_words_ = request.max_words;
    return response_;
  }
  std::string id() const override { return "test:counting"; }
  void set_response(std::string r) { response_ = std::move(r); }
  std::size_t calls() const { return prompts_.size(); }
  const std::vector<std::string>& prompts() const { return prompts_; }
  int last_max_words() const { return last_max_words_; }

 private:
  std::string response_ = "Fine. Extra.";
  mutable std::mutex mu_;
  mutable std::vector<std::string> prompts_;
  mutable int last_max_words_ = 0;
};

class FlakyLlm final : public LlmClient {
 public:
  explicit FlakyLlm(int failures) : failures_(failures) {}
  std::string Complete(const LlmRequest&) const override {
    if (calls_++ < failures_) throw TransportError("503");
    return "Recovered.";
  }
  std::string id() const override { return "test:flaky"; }

 private:
  int failures_;
  mutable std::atomic<int> calls_{0};
};

Corpus ToyCorpus() { return IngestJsonl(HIRO_FIXTURES_DIR "/toy/reviews.jsonl"); }

Cluster C(Path p, std::vector<std::string> ids) {
  Cluster c;
  c.subpath = std::move(p);
  c.sentence_ids = std::move(ids);
  return c;
}

ClusterSelection ToySelection() {
  ClusterSelection sel;
  sel.entity_id = "h1";
  sel.clusters = {C({0}, {"h1/r1/0", "h1/r2/0"}),
                  C({1}, {"h1/r1/1", "h1/r2/1", "h1/r2/2"}),
                  C({2}, {"h1/r1/2"})};
  return sel;
}

using testing::OracleCentroid;

TEST_CASE("centroid sentence examples") {
  std::vector<std::string> same = {"The bed was soft.", "The bed was soft."};
  CHECK(CentroidSentence(same) == 0);
  std::vector<std::string> aab = {"B shares nothing here.", "The pool was warm.",
                                  "The pool was warm."};
  CHECK(CentroidSentence(aab) == 1);
  std::vector<std::string> four = {
      "The staff were friendly.", "The staff were very friendly and kind.",
      "Friendly staff at the desk.", "The staff were friendly and helpful."};
  CHECK(CentroidSentence(four) == OracleCentroid(four));
  std::vector<std::string> one = {"Only."};
  CHECK(CentroidSentence(one) == 0);
  CHECK_THROWS(CentroidSentence(std::vector<std::string>{}));
}

TEST_CASE("centroid matches the pairwise oracle on random clusters") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words = {"the", "pool", "was", "warm", "staff",
                                          "rude", "room", "clean"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> cluster(1 + rng() % 6);
    for (auto& s : cluster) {
      const int len = 1 + static_cast<int>(rng() % 6);
      for (int w = 0; w < len; ++w) s += (w ? " " : "") + words[rng() % words.size()];
    }
    CHECK(CentroidSentence(cluster) == OracleCentroid(cluster));
  }
}

TEST_CASE("extractive summaries are verbatim centroids in cluster order") {
  Corpus corpus = ToyCorpus();
  ClusterSelection sel = ToySelection();
  Summary s = SummarizeExt(sel, corpus);
  REQUIRE(s.sentences.size() == 3);
  CHECK(s.mode == SummaryMode::kExt);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::string> texts;
    for (const auto& id : sel.clusters[i].sentence_ids) {
      texts.push_back(corpus.sentence(id).text);
    }
    CHECK(s.sentences[i] == texts[OracleCentroid(texts)]);
    CHECK(s.evidence[i] == sel.clusters[i].sentence_ids);
  }
  CHECK(s.sentences[2] == "Breakfast was excellent and fresh.");

  ClusterSelection empty;
  empty.entity_id = "h1";
  Summary e = SummarizeExt(empty, corpus);
  CHECK(e.sentences.empty());
  CHECK(e.warnings == std::vector<std::string>{"empty selection"});
}

TEST_CASE("sentence mode issues one request per cluster") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  ClusterSelection sel = ToySelection();
  sel.clusters.push_back(C({3}, {"h1/r2/3"}));
  sel.clusters.push_back(C({4}, {"h1/r2/2", "h1/r2/3"}));
  CountingLlm llm;
  GenerationOptions opts;
  opts.parallelism = 3;
  Summary s = SummarizeSent(sel, corpus, v, llm, "Harbor View Hotel", opts);
  CHECK(llm.calls() == 5);
  CHECK(llm.last_max_words() == 10);
  REQUIRE(s.sentences.size() == 5);
  for (const auto& sentence : s.sentences) CHECK(sentence == "Fine.");
  CHECK(s.evidence.size() == 5);
  for (const auto& p : llm.prompts()) {
    CHECK(p.find("reviews of the Harbor View Hotel:") != std::string::npos);
    CHECK(p.find("In no more than 10 words") != std::string::npos);
    CHECK(p.find("{entity name}") == std::string::npos);
    CHECK(p.find("[...]") == std::string::npos);
  }
}

TEST_CASE("echo backend returns each cluster's leading prompt sentence") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  ClusterSelection sel = ToySelection();
  EchoLlm echo;
  Summary s = SummarizeSent(sel, corpus, v, echo, "Harbor View Hotel", {});
  REQUIRE(s.sentences.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ordered = OrderByCentrality(sel.clusters[i].sentence_ids, corpus, v);
    CHECK(s.sentences[i] == corpus.sentence(ordered[0]).text);
  }
  CHECK(s.model == "mock:echo");
}

TEST_CASE("empty completions become flagged placeholders") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  ConstantLlm blank("   ");
  Summary s = SummarizeSent(ToySelection(), corpus, v, blank, "H", {});
  for (const auto& sentence : s.sentences) CHECK(sentence == kPlaceholderSentence);
  CHECK(s.warnings.size() == 3);
}

TEST_CASE("transport failures are retried") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  ClusterSelection one;
  one.entity_id = "h1";
  one.clusters = {C({0}, {"h1/r1/0"})};
  GenerationOptions opts;
  opts.max_retries = 2;
  FlakyLlm recovers(2);
  CHECK(SummarizeSent(one, corpus, v, recovers, "H", opts).sentences[0] ==
        "Recovered.");
  FlakyLlm fails(5);
  CHECK_THROWS_AS(SummarizeSent(one, corpus, v, fails, "H", opts), Error);
}

TEST_CASE("document mode sends one request and splits the response") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  CountingLlm llm;
  llm.set_response("The pool is great. Staff can be rude.\nBreakfast is good.");
  Summary s = SummarizeDoc(ToySelection(), corpus, v, llm, "Harbor View Hotel", {});
  CHECK(llm.calls() == 1);
  CHECK(llm.last_max_words() == 60);
  CHECK(s.sentences == std::vector<std::string>{"The pool is great.",
                                                "Staff can be rude.",
                                                "Breakfast is good."});
  CHECK(s.evidence.size() == 3);
  CHECK_FALSE(s.truncated);
  // Every selected sentence appears once, in cluster order.
  const std::string& prompt = llm.prompts()[0];
  std::size_t last = 0;
  for (const auto& c : ToySelection().clusters) {
    for (const auto& id : c.sentence_ids) {
      const auto pos = prompt.find(corpus.sentence(id).text);
      CHECK(pos != std::string::npos);
    }
    const auto first = prompt.find(corpus.sentence(c.sentence_ids[0]).text);
    CHECK(first >= last);
    last = first;
  }
  ClusterSelection empty;
  CHECK_THROWS(SummarizeDoc(empty, corpus, v, llm, "H", {}));
}

TEST_CASE("document mode subsamples input beyond the character budget") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  CountingLlm llm;
  GenerationOptions opts;
  opts.char_budget = 90;
  Summary s = SummarizeDoc(ToySelection(), corpus, v, llm, "H", opts);
  CHECK(s.truncated);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("input truncated") != std::string::npos);
  // At least one sentence per cluster survives.
  const std::string& prompt = llm.prompts()[0];
  for (const auto& c : ToySelection().clusters) {
    bool any = false;
    for (const auto& id : c.sentence_ids) {
      any = any || prompt.find(corpus.sentence(id).text) != std::string::npos;
    }
    CHECK(any);
  }
}

TEST_CASE("replay fixtures reproduce recorded responses byte for byte") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  ClusterSelection sel = ToySelection();
  GenerationOptions opts;
  // Record the prompts, then serve fixed responses keyed by their digests.
  CountingLlm probe;
  SummarizeSent(sel, corpus, v, probe, "Harbor View Hotel", opts);
  std::string fixture;
  const std::vector<std::string> responses = {
      "Guests love the pool. More text.", "Staff drew mixed remarks.",
      "Breakfast impressed guests."};
  for (std::size_t i = 0; i < 3; ++i) {
    fixture += R"({"prompt_sha256": ")" + Sha256Hex(probe.prompts()[i]) +
               R"(", "responses": [")" + responses[i] + R"(", "Alt."]})" "\n";
  }
  ReplayLlm replay = ReplayLlm::FromJsonl(fixture);
  Summary s = SummarizeSent(sel, corpus, v, replay, "Harbor View Hotel", opts);
  CHECK(s.Text() ==
        "Guests love the pool. Staff drew mixed remarks. Breakfast impressed "
        "guests.");
  opts.sample = 1;
  CHECK(SummarizeSent(sel, corpus, v, replay, "Harbor View Hotel", opts).Text() ==
        "Alt. Alt. Alt.");
  CHECK_THROWS(SummarizeSent(sel, corpus, v, replay, "Another Hotel", opts));
}

TEST_CASE("recording then replaying yields the same summaries") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  EchoLlm echo;
  RecordingLlm recorder(echo);
  GenerationOptions opts;
  Summary a = SummarizeDoc(ToySelection(), corpus, v, recorder, "H", opts);
  ReplayLlm replay = ReplayLlm::FromJsonl(recorder.ToJsonl());
  Summary b = SummarizeDoc(ToySelection(), corpus, v, replay, "H", opts);
  CHECK(a.sentences == b.sentences);
}

TEST_CASE("zero-shot prompt repeats the review block per review") {
  const PromptSet prompts = PromptSet::Builtin();
  std::vector<std::string> reviews = {"Great stay.", "Noisy room."};
  const std::string p = RenderZeroShotPrompt(prompts.zero_shot, reviews);
  CHECK(p == "Review:\nGreat stay.\nReview:\nNoisy room.\n"
             "Write a summary in 70 words or less:");
  ConstantLlm llm("Short stay. Noisy.");
  Summary s = SummarizeZeroShot("h1", reviews, llm, {});
  CHECK(s.sentences == std::vector<std::string>{"Short stay.", "Noisy."});
  CHECK(s.mode == SummaryMode::kZeroShot);
  // Explicitly repeated blocks work too.
  CHECK(RenderZeroShotPrompt("Review:\n[...]\nReview:\n[...]\nGo", reviews) ==
        "Review:\nGreat stay.\nReview:\nNoisy room.\nGo");
}

TEST_CASE("built-in prompts carry the expected instructions") {
  const PromptSet p = PromptSet::Builtin();
  CHECK(p.sent.find("In no more than 10 words") != std::string::npos);
  CHECK(p.doc.find("In no more than 60 words") != std::string::npos);
  CHECK(p.zero_shot.find("Write a summary in 70 words or less:") !=
        std::string::npos);
  const PromptSet from_dir = PromptSet::FromDirectory(HIRO_PROMPTS_DIR);
  CHECK(from_dir.sent == p.sent);
  CHECK(from_dir.doc == p.doc);
  CHECK(from_dir.zero_shot == p.zero_shot);
}

TEST_CASE("cluster prompt rendering") {
  std::vector<std::string> lines = {"A.", "B."};
  CHECK(RenderClusterPrompt("About {entity name}:\n[...]\nGo", "X", lines) ==
        "About X:\nA.\nB.\nGo");
}

TEST_CASE("summaries round-trip through JSONL") {
  Corpus corpus = ToyCorpus();
  Summary s = SummarizeExt(ToySelection(), corpus);
  s.warnings = {"w"};
  s.sample = 2;
  const std::string text = SummariesToJsonl(std::vector<Summary>{s});
  const auto back = SummariesFromJsonl(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].sentences == s.sentences);
  CHECK(back[0].evidence == s.evidence);
  CHECK(SummariesToJsonl(back) == text);
  CHECK(ParseSummaryMode("zero_shot") == SummaryMode::kZeroShot);
  CHECK(ToString(SummaryMode::kDoc) == "doc");
  CHECK_THROWS(ParseSummaryMode("abstractive"));
}

TEST_CASE("deterministic backends give repeatable summaries") {
  Corpus corpus = ToyCorpus();
  Vectorizer v = Vectorizer::Build(corpus);
  EchoLlm echo;
  GenerationOptions opts;
  opts.temperature = 0.0;
  opts.parallelism = 4;
  const auto a = SummarizeSent(ToySelection(), corpus, v, echo, "H", opts);
  const auto b = SummarizeSent(ToySelection(), corpus, v, echo, "H", opts);
  CHECK(SummariesToJsonl(std::vector<Summary>{a}) ==
        SummariesToJsonl(std::vector<Summary>{b}));
}

}  // namespace
}  // namespace hiro
