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

#ifndef HIRO_RETRIEVER_H_
#define HIRO_RETRIEVER_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hiro/corpus.h"
#include "hiro/embeddings.h"
#include "hiro/quantizer.h"

namespace hiro {

struct Assignment {
  std::string sentence_id;
  std::string entity_id;
  std::string review_id;
  Path path;
};

// Every sentence's full path plus per-entity subpath statistics. A review
// "contains" a subpath when any of its sentences' paths has it as a prefix.
class IndexedCorpus {
 public:
  struct EntityStats {
    std::string id;
    std::size_t review_count = 0;
    std::vector<std::size_t> sentences;  // assignment indices, input order
    // subpath -> number of the entity's reviews containing it
    std::map<Path, std::size_t> review_counts;
  };

  // Groups assignments by entity and review in order of first appearance.
  // All paths must share one depth.
  static IndexedCorpus FromAssignments(std::vector<Assignment> assignments);

  const std::vector<Assignment>& assignments() const { return assignments_; }
  const std::vector<EntityStats>& entities() const { return entities_; }
  std::size_t depth() const { return depth_; }

  std::optional<std::size_t> FindEntity(std::string_view id) const;
  const EntityStats& entity(std::string_view id) const;

  // Q(R): every prefix (depths 1..D) of the review's sentence paths.
  const std::set<Path>& ReviewSubpaths(std::string_view review_id) const;

  // Sum over entities of tp(subpath, e); 0 for unseen subpaths.
  double TermPopularitySum(const Path& subpath) const;
  // Number of sentences (corpus-wide) whose path has `subpath` as a prefix.
  std::size_t SentenceCount(const Path& subpath) const;

 private:
  std::vector<Assignment> assignments_;
  std::vector<EntityStats> entities_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::unordered_map<std::string, std::set<Path>> review_subpaths_;
  std::map<Path, double> tp_sum_;
  std::map<Path, std::size_t> sentence_counts_;
  std::size_t depth_ = 0;
};

IndexedCorpus IndexCorpus(const QuantizerModel& model, const Corpus& corpus,
                          const EmbeddingTable& embeddings);

// Fraction of the entity's reviews whose indexed form contains `subpath`.
double TermPopularity(const IndexedCorpus& index, const Path& subpath,
                      std::string_view entity_id);

// ((alpha + sum_e tp(subpath, e)) / (alpha + |E|))^-1. Throws when the
// smoothed mean is zero (alpha = 0 and the subpath occurs nowhere).
double InverseBaselinePopularity(const IndexedCorpus& index,
                                 const Path& subpath, double alpha);

struct SubpathScore {
  Path subpath;
  double tp = 0.0;
  double ibp = 0.0;
  double score = 0.0;  // tp * ibp
};

SubpathScore ScoreSubpath(const IndexedCorpus& index, const Path& subpath,
                          std::string_view entity_id, double alpha);

struct Cluster {
  Path subpath;
  double score = 0.0;
  std::vector<std::string> sentence_ids;
  // Labels of clusters folded into this one by PostprocessClusters.
  std::vector<Path> merged_subpaths;
};

struct ClusterSelection {
  std::string entity_id;
  std::vector<Cluster> clusters;  // descending score
  int k = 0;
  double alpha = 0.0;
};

// Scores every subpath occurring in the entity's reviews and returns the k
// best. Ties (scores equal to 1e-12): shallower first, then lexicographically
// smaller codes.
ClusterSelection SelectTopK(const IndexedCorpus& index,
                            std::string_view entity_id, int k, double alpha);

struct PostprocessOptions {
  double drop_threshold = 0.05;
  double merge_threshold = 0.5;
};

// Drops sentences whose mean tf-idf cosine to the rest of their cluster is
// below drop_threshold, then repeatedly merges the most similar pair of
// clusters while their mean cross-cluster cosine exceeds merge_threshold.
ClusterSelection PostprocessClusters(const ClusterSelection& selection,
                                     const Corpus& corpus,
                                     const Vectorizer& vectorizer,
                                     const PostprocessOptions& options);

// depth -> number of selected clusters with a subpath of that depth.
std::map<std::size_t, std::size_t> DepthHistogram(
    std::span<const ClusterSelection> selections);

std::string AssignmentsToJsonl(std::span<const Assignment> assignments);
std::vector<Assignment> AssignmentsFromJsonl(std::string_view text);
std::string SelectionsToJson(std::span<const ClusterSelection> selections);
std::vector<ClusterSelection> SelectionsFromJson(std::string_view text);
std::string DepthHistogramToCsv(const std::map<std::size_t, std::size_t>& hist);

}  // namespace hiro

#endif  // HIRO_RETRIEVER_H_
