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

#include "hiro/retriever.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace hiro {

using nlohmann::json;

IndexedCorpus IndexedCorpus::FromAssignments(
    std::vector<Assignment> assignments) {
  IndexedCorpus idx;
  idx.assignments_ = std::move(assignments);

  // review id -> owning entity, to count each review once per entity
  std::unordered_map<std::string, std::string> review_entity;
  for (std::size_t i = 0; i < idx.assignments_.size(); ++i) {
    const Assignment& a = idx.assignments_[i];
    if (a.path.empty()) throw Error("empty path for sentence " + a.sentence_id);
    if (idx.depth_ == 0) idx.depth_ = a.path.depth();
    if (a.path.depth() != idx.depth_) {
      throw Error("sentence " + a.sentence_id + " has path depth " +
                  std::to_string(a.path.depth()) + ", expected " +
                  std::to_string(idx.depth_));
    }
    auto [eit, new_entity] =
        idx.entity_index_.try_emplace(a.entity_id, idx.entities_.size());
    if (new_entity) {
      idx.entities_.emplace_back();
      idx.entities_.back().id = a.entity_id;
    }
    EntityStats& entity = idx.entities_[eit->second];
    entity.sentences.push_back(i);

    auto [rit, new_review] = review_entity.try_emplace(a.review_id, a.entity_id);
    if (new_review) {
      ++entity.review_count;
    } else if (rit->second != a.entity_id) {
      throw Error("review " + a.review_id + " belongs to two entities");
    }
    std::set<Path>& q = idx.review_subpaths_[a.review_id];
    for (std::size_t d = 1; d <= a.path.depth(); ++d) {
      Path prefix = a.path.Prefix(d);
      ++idx.sentence_counts_[prefix];
      q.insert(std::move(prefix));
    }
  }

  for (const auto& [review_id, subpaths] : idx.review_subpaths_) {
    EntityStats& entity =
        idx.entities_[idx.entity_index_.at(review_entity.at(review_id))];
    for (const Path& p : subpaths) ++entity.review_counts[p];
  }
  // Sum in entity id order so scores do not depend on input order.
  std::vector<const EntityStats*> by_id;
  for (const EntityStats& entity : idx.entities_) by_id.push_back(&entity);
  std::sort(by_id.begin(), by_id.end(),
            [](const EntityStats* a, const EntityStats* b) { return a->id < b->id; });
  for (const EntityStats* e : by_id) {
    const EntityStats& entity = *e;
    for (const auto& [p, count] : entity.review_counts) {
      idx.tp_sum_[p] += static_cast<double>(count) /
                        static_cast<double>(entity.review_count);
    }
  }
  return idx;
}

std::optional<std::size_t> IndexedCorpus::FindEntity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

const IndexedCorpus::EntityStats& IndexedCorpus::entity(
    std::string_view id) const {
  auto i = FindEntity(id);
  if (!i) throw Error("entity " + std::string(id) + " has no indexed sentences");
  return entities_[*i];
}

const std::set<Path>& IndexedCorpus::ReviewSubpaths(
    std::string_view review_id) const {
  auto it = review_subpaths_.find(std::string(review_id));
  if (it == review_subpaths_.end()) {
    throw Error("unknown review " + std::string(review_id));
  }
  return it->second;
}

double IndexedCorpus::TermPopularitySum(const Path& subpath) const {
  auto it = tp_sum_.find(subpath);
  return it == tp_sum_.end() ? 0.0 : it->second;
}

std::size_t IndexedCorpus::SentenceCount(const Path& subpath) const {
  auto it = sentence_counts_.find(subpath);
  return it == sentence_counts_.end() ? 0 : it->second;
}

IndexedCorpus IndexCorpus(const QuantizerModel& model, const Corpus& corpus,
                          const EmbeddingTable& embeddings) {
  std::vector<Assignment> assignments;
  assignments.reserve(corpus.sentences().size());
  for (const Sentence& s : corpus.sentences()) {
    assignments.push_back({s.id, s.entity_id, s.review_id,
                           Encode(model, embeddings.GetVector(s.id))});
  }
  return IndexedCorpus::FromAssignments(std::move(assignments));
}

double TermPopularity(const IndexedCorpus& index, const Path& subpath,
                      std::string_view entity_id) {
  const auto& entity = index.entity(entity_id);
  auto it = entity.review_counts.find(subpath);
  if (it == entity.review_counts.end()) return 0.0;
  return static_cast<double>(it->second) /
         static_cast<double>(entity.review_count);
}

double InverseBaselinePopularity(const IndexedCorpus& index,
                                 const Path& subpath, double alpha) {
  if (alpha < 0.0) throw Error("smoothing alpha must be non-negative");
  if (index.entities().empty()) throw Error("index has no entities");
  const double num = alpha + index.TermPopularitySum(subpath);
  if (num <= 0.0) {
    throw Error("inverse baseline popularity of " + subpath.ToString() +
                " is undefined: alpha is 0 and the subpath occurs nowhere");
  }
  return (alpha + static_cast<double>(index.entities().size())) / num;
}

SubpathScore ScoreSubpath(const IndexedCorpus& index, const Path& subpath,
                          std::string_view entity_id, double alpha) {
  SubpathScore s;
  s.subpath = subpath;
  s.tp = TermPopularity(index, subpath, entity_id);
  s.ibp = InverseBaselinePopularity(index, subpath, alpha);
  s.score = s.tp * s.ibp;
  return s;
}

ClusterSelection SelectTopK(const IndexedCorpus& index,
                            std::string_view entity_id, int k, double alpha) {
  if (k < 1) throw Error("k must be at least 1");
  const auto& entity = index.entity(entity_id);
  if (entity.sentences.empty()) {
    throw Error("entity " + std::string(entity_id) + " has no sentences");
  }

  std::vector<SubpathScore> scored;
  scored.reserve(entity.review_counts.size());
  for (const auto& [subpath, _] : entity.review_counts) {
    scored.push_back(ScoreSubpath(index, subpath, entity_id, alpha));
  }
  // Scores that agree to 1e-12 tie, so that mathematically equal scores
  // reached through different rounding still fall to the tie rule.
  auto tie_key = [](double score) { return std::round(score * 1e12); };
  auto better = [&](const SubpathScore& a, const SubpathScore& b) {
    const double ka = tie_key(a.score), kb = tie_key(b.score);
    if (ka != kb) return ka > kb;
    if (a.subpath.depth() != b.subpath.depth()) {
      return a.subpath.depth() < b.subpath.depth();
    }
    return a.subpath < b.subpath;
  };
  const std::size_t n = std::min(scored.size(), static_cast<std::size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(n),
                    scored.end(), better);

  ClusterSelection selection;
  selection.entity_id = std::string(entity_id);
  selection.k = k;
  selection.alpha = alpha;
  for (std::size_t c = 0; c < n; ++c) {
    Cluster cluster;
    cluster.subpath = scored[c].subpath;
    cluster.score = scored[c].score;
    for (std::size_t i : entity.sentences) {
      const Assignment& a = index.assignments()[i];
      if (cluster.subpath.IsPrefixOf(a.path)) {
        cluster.sentence_ids.push_back(a.sentence_id);
      }
    }
    selection.clusters.push_back(std::move(cluster));
  }
  return selection;
}

namespace {

// Mean cosine between members of `a` and `b`, skipping pairs that are the
// same sentence. Returns 1 when only such pairs exist.
double MeanCrossSimilarity(const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b,
                           const Vectorizer& vectorizer) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i : a) {
    for (std::size_t j : b) {
      if (i == j) continue;
      sum += vectorizer.Sim(i, j);
      ++count;
    }
  }
  return count == 0 ? 1.0 : sum / static_cast<double>(count);
}

}  // namespace

ClusterSelection PostprocessClusters(const ClusterSelection& selection,
                                     const Corpus& corpus,
                                     const Vectorizer& vectorizer,
                                     const PostprocessOptions& options) {
  ClusterSelection out = selection;
  out.clusters.clear();
  std::vector<std::vector<std::size_t>> members;

  // Filter: every member is judged against the unfiltered cluster.
  for (const Cluster& cluster : selection.clusters) {
    std::vector<std::size_t> ids;
    for (const std::string& id : cluster.sentence_ids) {
      ids.push_back(corpus.SentenceIndex(id));
    }
    Cluster kept = cluster;
    std::vector<std::size_t> kept_ids;
    if (ids.size() <= 1) {
      kept_ids = ids;
    } else {
      kept.sentence_ids.clear();
      for (std::size_t a = 0; a < ids.size(); ++a) {
        double sum = 0.0;
        for (std::size_t b = 0; b < ids.size(); ++b) {
          if (a != b) sum += vectorizer.Sim(ids[a], ids[b]);
        }
        const double mean = sum / static_cast<double>(ids.size() - 1);
        if (mean >= options.drop_threshold) {
          kept.sentence_ids.push_back(cluster.sentence_ids[a]);
          kept_ids.push_back(ids[a]);
        }
      }
    }
    if (kept_ids.empty()) continue;
    out.clusters.push_back(std::move(kept));
    members.push_back(std::move(kept_ids));
  }

  // Merge the most similar pair until no pair clears the threshold.
  for (;;) {
    double best = options.merge_threshold;
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const double sim = MeanCrossSimilarity(members[i], members[j], vectorizer);
        if (sim > best) {
          best = sim;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    if (!found) break;
    // Clusters stay in descending score order, so bi holds the label.
    Cluster& keep = out.clusters[bi];
    Cluster& gone = out.clusters[bj];
    std::unordered_set<std::size_t> seen(members[bi].begin(), members[bi].end());
    for (std::size_t m = 0; m < members[bj].size(); ++m) {
      if (seen.insert(members[bj][m]).second) {
        members[bi].push_back(members[bj][m]);
        keep.sentence_ids.push_back(gone.sentence_ids[m]);
      }
    }
    keep.merged_subpaths.push_back(gone.subpath);
    keep.merged_subpaths.insert(keep.merged_subpaths.end(),
                                gone.merged_subpaths.begin(),
                                gone.merged_subpaths.end());
    out.clusters.erase(out.clusters.begin() + static_cast<long>(bj));
    members.erase(members.begin() + static_cast<long>(bj));
  }
  return out;
}

std::map<std::size_t, std::size_t> DepthHistogram(
    std::span<const ClusterSelection> selections) {
  std::map<std::size_t, std::size_t> hist;
  for (const ClusterSelection& s : selections) {
    for (const Cluster& c : s.clusters) ++hist[c.subpath.depth()];
  }
  return hist;
}

std::string AssignmentsToJsonl(std::span<const Assignment> assignments) {
  std::string out;
  for (const Assignment& a : assignments) {
    json line = {{"sentence_id", a.sentence_id},
                 {"entity_id", a.entity_id},
                 {"review_id", a.review_id},
                 {"path", a.path.codes()}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<Assignment> AssignmentsFromJsonl(std::string_view text) {
  std::vector<Assignment> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("sentence_id").get<std::string>(),
                     j.at("entity_id").get<std::string>(),
                     j.at("review_id").get<std::string>(),
                     Path(j.at("path").get<std::vector<int>>())});
    } catch (const json::exception& e) {
      throw Error("assignments line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return out;
}

std::string SelectionsToJson(std::span<const ClusterSelection> selections) {
  json doc = json::array();
  for (const ClusterSelection& s : selections) {
    json clusters = json::array();
    for (const Cluster& c : s.clusters) {
      json merged = json::array();
      for (const Path& p : c.merged_subpaths) merged.push_back(p.codes());
      clusters.push_back({{"subpath", c.subpath.codes()},
                          {"score", c.score},
                          {"sentence_ids", c.sentence_ids},
                          {"merged_subpaths", std::move(merged)}});
    }
    doc.push_back({{"entity_id", s.entity_id},
                   {"k", s.k},
                   {"alpha", s.alpha},
                   {"clusters", std::move(clusters)}});
  }
  return doc.dump(1) + "\n";
}

std::vector<ClusterSelection> SelectionsFromJson(std::string_view text) {
  std::vector<ClusterSelection> out;
  try {
    const json doc = json::parse(text);
    for (const json& s : doc) {
      ClusterSelection sel;
      sel.entity_id = s.at("entity_id").get<std::string>();
      sel.k = s.value("k", 0);
      sel.alpha = s.value("alpha", 0.0);
      for (const json& c : s.at("clusters")) {
        Cluster cluster;
        cluster.subpath = Path(c.at("subpath").get<std::vector<int>>());
        cluster.score = c.at("score").get<double>();
        cluster.sentence_ids =
            c.at("sentence_ids").get<std::vector<std::string>>();
        if (c.contains("merged_subpaths")) {
          for (const json& p : c.at("merged_subpaths")) {
            cluster.merged_subpaths.emplace_back(p.get<std::vector<int>>());
          }
        }
        sel.clusters.push_back(std::move(cluster));
      }
      out.push_back(std::move(sel));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("selections: ") + e.what());
  }
  return out;
}

std::string DepthHistogramToCsv(
    const std::map<std::size_t, std::size_t>& hist) {
  std::string out = "depth,count\n";
  for (const auto& [depth, count] : hist) {
    out += std::to_string(depth) + "," + std::to_string(count) + "\n";
  }
  return out;
}

}  // namespace hiro
