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

#ifndef HIRO_CORPUS_H_
#define HIRO_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hiro/common.h"

namespace hiro {

class IngestError : public Error {
 public:
  using Error::Error;
};

struct Sentence {
  std::string id;  // "<entity>/<review>/<ordinal>"
  std::string entity_id;
  std::string review_id;
  std::string text;
  std::vector<std::string> tokens;
};

struct Review {
  std::string id;
  std::string entity_id;
  std::vector<std::string> sentence_ids;
};

struct Entity {
  std::string id;
  std::string name;
  std::vector<std::string> review_ids;
};

// Lowercases ASCII letters and splits on every non-alphanumeric byte. Bytes
// >= 0x80 are treated as alphanumeric so UTF-8 words stay intact.
std::vector<std::string> Tokenize(std::string_view text);

// Rule-based sentence splitter. A boundary is a run of '.', '!' or '?'
// (optionally followed by closing quotes or brackets) that is followed by
// whitespace and then an uppercase letter, or by the end of the text. A
// period ending a known abbreviation ("Mr.", "e.g.", "approx.", ...) or a
// single letter initial is never a boundary. Returned sentences are trimmed;
// empty ones are dropped.
std::vector<std::string> SplitSentences(std::string_view text);

// Entities, reviews and sentences in file order. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Entity> entities, std::vector<Review> reviews,
         std::vector<Sentence> sentences);

  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Review>& reviews() const { return reviews_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }

  std::size_t SentenceIndex(std::string_view id) const;
  std::size_t ReviewIndex(std::string_view id) const;
  std::size_t EntityIndex(std::string_view id) const;
  std::optional<std::size_t> FindSentence(std::string_view id) const;
  std::optional<std::size_t> FindEntity(std::string_view id) const;

  const Sentence& sentence(std::string_view id) const {
    return sentences_[SentenceIndex(id)];
  }

  // Index of the review owning sentence `sentence_index`.
  std::size_t ReviewOf(std::size_t sentence_index) const {
    return sentence_review_[sentence_index];
  }
  std::size_t EntityOf(std::size_t sentence_index) const {
    return sentence_entity_[sentence_index];
  }
  // Sentence indices of one review / one entity, in corpus order.
  std::span<const std::size_t> ReviewSentences(std::size_t review) const {
    return review_sentences_[review];
  }
  std::span<const std::size_t> EntityReviews(std::size_t entity) const {
    return entity_reviews_[entity];
  }
  std::vector<std::size_t> EntitySentences(std::size_t entity) const;

  // Versioned JSON document; byte-stable for equal corpora.
  std::string ToJson() const;
  static Corpus FromJson(std::string_view json);
  void Save(const std::filesystem::path& path) const;
  static Corpus Load(const std::filesystem::path& path);

 private:
  std::vector<Entity> entities_;
  std::vector<Review> reviews_;
  std::vector<Sentence> sentences_;

  std::unordered_map<std::string, std::size_t> sentence_index_;
  std::unordered_map<std::string, std::size_t> review_index_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::vector<std::size_t> sentence_review_;
  std::vector<std::size_t> sentence_entity_;
  std::vector<std::vector<std::size_t>> review_sentences_;
  std::vector<std::vector<std::size_t>> entity_reviews_;
};

// Reads one review per line: {"entity_id", "review_id", "text",
// "entity_name"?}. Blank lines are skipped.
Corpus IngestJsonl(const std::filesystem::path& path);
Corpus IngestJsonlString(std::string_view contents);

// tf-idf vector with entries sorted by term index. Weights are strictly
// positive; `l2_norm` is the stored norm of `entries`.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  double l2_norm = 0.0;

  bool empty() const { return entries.empty(); }
  double RecomputeNorm() const;
};

// Cosine similarity clamped to [0, 1]; 0 when either vector is zero.
double TfidfSim(const SparseVector& a, const SparseVector& b);

// Sentence-level tf-idf with smoothed idf:
//   idf(t) = ln((1 + S) / (1 + df(t))) + 1
// and l2-normalised tf * idf weights.
class Vectorizer {
 public:
  static Vectorizer Build(const Corpus& corpus);

  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  std::optional<std::uint32_t> TermIndex(std::string_view token) const;
  double Idf(std::uint32_t term) const { return idf_[term]; }
  double Idf(std::string_view token) const;

  // Vector of corpus sentence `i`.
  const SparseVector& vector(std::size_t i) const { return vectors_[i]; }
  std::size_t size() const { return vectors_.size(); }

  // Vectorises arbitrary tokens; out-of-vocabulary tokens are ignored.
  SparseVector Transform(std::span<const std::string> tokens) const;

  double Sim(std::size_t a, std::size_t b) const {
    return TfidfSim(vectors_[a], vectors_[b]);
  }

  // Cosine of `query` against every corpus sentence sharing at least one
  // term with it, via the inverted index. Pairs of (sentence, similarity).
  std::vector<std::pair<std::size_t, double>> SimilarSentences(
      const SparseVector& query) const;

 private:
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<double> idf_;
  std::vector<SparseVector> vectors_;
  // term -> (sentence, weight)
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;
};

}  // namespace hiro

#endif  // HIRO_CORPUS_H_
