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

#include "hiro/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace hiro {
namespace {

using json = nlohmann::json;

constexpr int kCorpusVersion = 1;

bool IsAlnum(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsCloser(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "mr", "mrs", "ms",  "dr",  "prof",   "sr",  "jr",  "st",
    "vs", "e.g", "i.e", "eg",  "approx", "inc", "ltd", "mt"};

// True when the '.' at `dot` ends an abbreviation or a one-letter initial.
bool EndsAbbreviation(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && (IsAlnum(text[begin - 1]) || text[begin - 1] == '.')) {
    --begin;
  }
  std::string word(text.substr(begin, dot - begin));
  if (word.empty()) return false;
  if (word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0]))) {
    return true;
  }
  std::transform(word.begin(), word.end(), word.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
         kAbbreviations.end();
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

const std::string& RequireString(const json& obj, const char* key,
                                 std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw IngestError("line " + std::to_string(line) + ": missing string field \"" +
                      key + "\"");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (IsAlnum(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&out](std::string_view piece) {
    piece = Trim(piece);
    if (!piece.empty()) out.emplace_back(piece);
  };

  const std::size_t n = text.size();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!IsTerminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && IsTerminator(text[j])) ++j;
    const bool single_period = (j - i == 1 && text[i] == '.');
    while (j < n && IsCloser(text[j])) ++j;

    bool boundary = false;
    if (j == n) {
      boundary = true;
    } else if (IsSpace(text[j])) {
      std::size_t k = j;
      while (k < n && IsSpace(text[k])) ++k;
      boundary =
          k == n || std::isupper(static_cast<unsigned char>(text[k])) != 0;
    }
    if (boundary && single_period && EndsAbbreviation(text, i)) {
      boundary = false;
    }
    if (boundary) {
      emit(text.substr(start, j - start));
      start = j;
    }
    i = j;
  }
  if (start < n) emit(text.substr(start));
  return out;
}

Corpus::Corpus(std::vector<Entity> entities, std::vector<Review> reviews,
               std::vector<Sentence> sentences)
    : entities_(std::move(entities)),
      reviews_(std::move(reviews)),
      sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    const Sentence& s = sentences_[i];
    if (Trim(s.text).empty()) {
      throw IngestError("sentence " + s.id + " has empty text");
    }
    if (!sentence_index_.emplace(s.id, i).second) {
      throw IngestError("duplicate sentence id " + s.id);
    }
  }
  for (std::size_t i = 0; i < reviews_.size(); ++i) {
    if (!review_index_.emplace(reviews_[i].id, i).second) {
      throw IngestError("duplicate review id " + reviews_[i].id);
    }
  }
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_index_.emplace(entities_[i].id, i).second) {
      throw IngestError("duplicate entity id " + entities_[i].id);
    }
  }

  sentence_review_.assign(sentences_.size(), reviews_.size());
  sentence_entity_.assign(sentences_.size(), entities_.size());
  review_sentences_.resize(reviews_.size());
  entity_reviews_.resize(entities_.size());

  for (std::size_t r = 0; r < reviews_.size(); ++r) {
    const Review& review = reviews_[r];
    if (review.sentence_ids.empty()) {
      throw IngestError("review " + review.id + " has no sentences");
    }
    for (const std::string& sid : review.sentence_ids) {
      auto it = sentence_index_.find(sid);
      if (it == sentence_index_.end()) {
        throw IngestError("review " + review.id +
                          " references unknown sentence " + sid);
      }
      if (sentences_[it->second].entity_id != review.entity_id ||
          sentences_[it->second].review_id != review.id) {
        throw IngestError("sentence " + sid + " does not belong to review " +
                          review.id);
      }
      sentence_review_[it->second] = r;
      review_sentences_[r].push_back(it->second);
    }
  }
  for (std::size_t e = 0; e < entities_.size(); ++e) {
    const Entity& entity = entities_[e];
    if (entity.review_ids.empty()) {
      throw IngestError("entity " + entity.id + " has no reviews");
    }
    for (const std::string& rid : entity.review_ids) {
      auto it = review_index_.find(rid);
      if (it == review_index_.end()) {
        throw IngestError("entity " + entity.id +
                          " references unknown review " + rid);
      }
      if (reviews_[it->second].entity_id != entity.id) {
        throw IngestError("review " + rid + " does not belong to entity " +
                          entity.id);
      }
      entity_reviews_[e].push_back(it->second);
      for (std::size_t s : review_sentences_[it->second]) {
        sentence_entity_[s] = e;
      }
    }
  }
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (sentence_review_[i] == reviews_.size() ||
        sentence_entity_[i] == entities_.size()) {
      throw IngestError("sentence " + sentences_[i].id +
                        " is not referenced by any review");
    }
  }
}

std::size_t Corpus::SentenceIndex(std::string_view id) const {
  auto found = FindSentence(id);
  if (!found) throw Error("unknown sentence id " + std::string(id));
  return *found;
}

std::optional<std::size_t> Corpus::FindSentence(std::string_view id) const {
  auto it = sentence_index_.find(std::string(id));
  if (it == sentence_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::ReviewIndex(std::string_view id) const {
  auto it = review_index_.find(std::string(id));
  if (it == review_index_.end()) {
    throw Error("unknown review id " + std::string(id));
  }
  return it->second;
}

std::size_t Corpus::EntityIndex(std::string_view id) const {
  auto found = FindEntity(id);
  if (!found) throw Error("unknown entity id " + std::string(id));
  return *found;
}

std::optional<std::size_t> Corpus::FindEntity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Corpus::EntitySentences(std::size_t entity) const {
  std::vector<std::size_t> out;
  for (std::size_t r : entity_reviews_[entity]) {
    const auto& ss = review_sentences_[r];
    out.insert(out.end(), ss.begin(), ss.end());
  }
  return out;
}

std::string Corpus::ToJson() const {
  json doc;
  doc["version"] = kCorpusVersion;
  json& ents = doc["entities"] = json::array();
  for (const Entity& e : entities_) {
    ents.push_back({{"id", e.id}, {"name", e.name}, {"review_ids", e.review_ids}});
  }
  json& revs = doc["reviews"] = json::array();
  for (const Review& r : reviews_) {
    revs.push_back({{"id", r.id},
                    {"entity_id", r.entity_id},
                    {"sentence_ids", r.sentence_ids}});
  }
  json& sents = doc["sentences"] = json::array();
  for (const Sentence& s : sentences_) {
    sents.push_back({{"id", s.id},
                     {"entity_id", s.entity_id},
                     {"review_id", s.review_id},
                     {"text", s.text}});
  }
  return doc.dump(1) + "\n";
}

Corpus Corpus::FromJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(std::string("corpus file: ") + e.what());
  }
  if (doc.value("version", 0) != kCorpusVersion) {
    throw IngestError("corpus file: unsupported version");
  }
  std::vector<Entity> entities;
  for (const json& e : doc.at("entities")) {
    entities.push_back({e.at("id").get<std::string>(),
                        e.at("name").get<std::string>(),
                        e.at("review_ids").get<std::vector<std::string>>()});
  }
  std::vector<Review> reviews;
  for (const json& r : doc.at("reviews")) {
    reviews.push_back({r.at("id").get<std::string>(),
                       r.at("entity_id").get<std::string>(),
                       r.at("sentence_ids").get<std::vector<std::string>>()});
  }
  std::vector<Sentence> sentences;
  for (const json& s : doc.at("sentences")) {
    Sentence sent;
    sent.id = s.at("id").get<std::string>();
    sent.entity_id = s.at("entity_id").get<std::string>();
    sent.review_id = s.at("review_id").get<std::string>();
    sent.text = s.at("text").get<std::string>();
    sent.tokens = Tokenize(sent.text);
    sentences.push_back(std::move(sent));
  }
  return Corpus(std::move(entities), std::move(reviews), std::move(sentences));
}

void Corpus::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, ToJson());
}

Corpus Corpus::Load(const std::filesystem::path& path) {
  return FromJson(ReadFile(path));
}

Corpus IngestJsonlString(std::string_view contents) {
  std::vector<Entity> entities;
  std::vector<Review> reviews;
  std::vector<Sentence> sentences;
  std::map<std::string, std::size_t> entity_slot;
  std::set<std::pair<std::string, std::string>> seen_reviews;

  std::size_t line_no = 0;
  std::size_t records = 0;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IngestError("line " + std::to_string(line_no) +
                        ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw IngestError("line " + std::to_string(line_no) +
                        ": expected a JSON object");
    }
    const std::string& entity_id = RequireString(obj, "entity_id", line_no);
    const std::string& review_id = RequireString(obj, "review_id", line_no);
    const std::string& text = RequireString(obj, "text", line_no);
    ++records;

    if (!seen_reviews.emplace(entity_id, review_id).second) {
      throw IngestError("line " + std::to_string(line_no) +
                        ": duplicate review " + entity_id + "/" + review_id);
    }

    std::vector<std::string> pieces = SplitSentences(text);
    if (pieces.empty()) continue;

    auto [slot, inserted] = entity_slot.emplace(entity_id, entities.size());
    if (inserted) {
      std::string name = entity_id;
      if (auto it = obj.find("entity_name");
          it != obj.end() && it->is_string()) {
        name = it->get<std::string>();
      }
      entities.push_back({entity_id, std::move(name), {}});
    }

    // Review ids are scoped by entity in the input; qualify them so they are
    // unique corpus-wide.
    Review review{entity_id + "/" + review_id, entity_id, {}};
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      Sentence s;
      s.id = review.id + "/" + std::to_string(k);
      s.entity_id = entity_id;
      s.review_id = review.id;
      s.tokens = Tokenize(pieces[k]);
      s.text = std::move(pieces[k]);
      review.sentence_ids.push_back(s.id);
      sentences.push_back(std::move(s));
    }
    entities[slot->second].review_ids.push_back(review.id);
    reviews.push_back(std::move(review));
  }
  if (records == 0) throw IngestError("input contains no reviews");
  if (sentences.empty()) throw IngestError("input contains no sentences");
  return Corpus(std::move(entities), std::move(reviews), std::move(sentences));
}

Corpus IngestJsonl(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IngestError("no such file: " + path.string());
  }
  return IngestJsonlString(ReadFile(path));
}

double SparseVector::RecomputeNorm() const {
  double sum = 0.0;
  for (const auto& [_, w] : entries) sum += w * w;
  return std::sqrt(sum);
}

double TfidfSim(const SparseVector& a, const SparseVector& b) {
  if (a.l2_norm == 0.0 || b.l2_norm == 0.0) return 0.0;
  double dot = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (a.l2_norm * b.l2_norm), 0.0, 1.0);
}

Vectorizer Vectorizer::Build(const Corpus& corpus) {
  Vectorizer v;
  const auto& sentences = corpus.sentences();
  std::map<std::string_view, std::size_t> df;
  for (const Sentence& s : sentences) {
    std::set<std::string_view> unique(s.tokens.begin(), s.tokens.end());
    for (std::string_view t : unique) ++df[t];
  }
  const double total = static_cast<double>(sentences.size());
  v.idf_.reserve(df.size());
  for (const auto& [token, count] : df) {
    v.vocabulary_.emplace(std::string(token),
                          static_cast<std::uint32_t>(v.idf_.size()));
    v.idf_.push_back(std::log((1.0 + total) / (1.0 + count)) + 1.0);
  }
  v.postings_.resize(v.idf_.size());
  v.vectors_.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    v.vectors_.push_back(v.Transform(sentences[i].tokens));
    for (const auto& [term, w] : v.vectors_.back().entries) {
      v.postings_[term].emplace_back(i, w);
    }
  }
  return v;
}

std::optional<std::uint32_t> Vectorizer::TermIndex(std::string_view token) const {
  auto it = vocabulary_.find(std::string(token));
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

double Vectorizer::Idf(std::string_view token) const {
  auto term = TermIndex(token);
  if (!term) throw Error("token not in vocabulary: " + std::string(token));
  return idf_[*term];
}

SparseVector Vectorizer::Transform(std::span<const std::string> tokens) const {
  std::map<std::uint32_t, double> tf;
  for (const std::string& t : tokens) {
    if (auto term = TermIndex(t)) tf[*term] += 1.0;
  }
  SparseVector out;
  out.entries.reserve(tf.size());
  double sum = 0.0;
  for (const auto& [term, count] : tf) {
    const double w = count * idf_[term];
    out.entries.emplace_back(term, w);
    sum += w * w;
  }
  if (sum > 0.0) {
    const double norm = std::sqrt(sum);
    for (auto& [_, w] : out.entries) w /= norm;
    out.l2_norm = out.RecomputeNorm();
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> Vectorizer::SimilarSentences(
    const SparseVector& query) const {
  std::vector<std::size_t> touched;
  for (const auto& [term, _] : query.entries) {
    if (term >= postings_.size()) continue;
    for (const auto& [sentence, __] : postings_[term]) touched.push_back(sentence);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(touched.size());
  for (std::size_t sentence : touched) {
    out.emplace_back(sentence, TfidfSim(query, vectors_[sentence]));
  }
  return out;
}

}  // namespace hiro
