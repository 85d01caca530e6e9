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

#include "hiro/evalmetrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "parallel.h"

namespace hiro {
namespace {

using nlohmann::json;

bool Entails(const EntailmentClient& nli, std::string_view premise,
             std::string_view hypothesis, const NliEvalOptions& options) {
  const double p = PEntailWithRetry(nli, premise, hypothesis,
                                    options.max_retries, "evaluation");
  return Classify(p, options.threshold) == EntailmentLabel::kEntailed;
}

std::string Join(const std::vector<std::string>& sentences) {
  std::string out;
  for (const std::string& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

double Comb2(double n) { return n * (n - 1.0) / 2.0; }

json OptionalToJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json EntityToJson(const EntityEval& e) {
  return {{"entity_id", e.entity_id},
          {"prevalence", e.prevalence},
          {"genericness", e.genericness},
          {"sap", e.sap},
          {"rouge2_f1", OptionalToJson(e.rouge2_f1)},
          {"rougeL_f1", OptionalToJson(e.rougeL_f1)},
          {"partial_support_pct", e.partial_support_pct},
          {"majority_support_pct", e.majority_support_pct}};
}

EntityEval EntityFromJson(const json& j) {
  EntityEval e;
  e.entity_id = j.at("entity_id").get<std::string>();
  e.prevalence = j.at("prevalence").get<double>();
  e.genericness = j.at("genericness").get<double>();
  e.sap = j.at("sap").get<double>();
  e.rouge2_f1 = OptionalFromJson(j, "rouge2_f1");
  e.rougeL_f1 = OptionalFromJson(j, "rougeL_f1");
  e.partial_support_pct = j.at("partial_support_pct").get<double>();
  e.majority_support_pct = j.at("majority_support_pct").get<double>();
  return e;
}

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatNumber(*v) : "";
}

}  // namespace

double Prevalence(std::span<const std::string> summary,
                  std::span<const std::vector<std::string>> reviews,
                  const EntailmentClient& nli, const NliEvalOptions& options) {
  if (reviews.empty()) throw Error("prevalence needs at least one review");
  if (summary.empty()) return 0.0;
  std::vector<double> support(summary.size());
  internal::ParallelFor(summary.size(), options.parallelism, [&](std::size_t s) {
    std::size_t supporting = 0;
    for (const auto& review : reviews) {
      for (const std::string& premise : review) {
        if (Entails(nli, premise, summary[s], options)) {
          ++supporting;
          break;
        }
      }
    }
    support[s] = static_cast<double>(supporting) /
                 static_cast<double>(reviews.size());
  });
  double total = 0.0;
  for (double v : support) total += v;
  return total / static_cast<double>(summary.size());
}

std::vector<double> Genericness(
    std::span<const std::vector<std::string>> summaries,
    const EntailmentClient& nli, const NliEvalOptions& options) {
  if (summaries.size() < 2) {
    throw Error("genericness needs summaries for at least two entities");
  }
  std::vector<std::string> joined;
  for (const auto& s : summaries) joined.push_back(Join(s));

  // Flatten (entity, sentence) so the work spreads evenly.
  std::vector<std::pair<std::size_t, std::size_t>> items;
  for (std::size_t e = 0; e < summaries.size(); ++e) {
    for (std::size_t s = 0; s < summaries[e].size(); ++s) items.push_back({e, s});
  }
  std::vector<double> counts(items.size());
  internal::ParallelFor(items.size(), options.parallelism, [&](std::size_t i) {
    const auto [e, s] = items[i];
    std::size_t n = 0;
    for (std::size_t other = 0; other < summaries.size(); ++other) {
      if (other == e || joined[other].empty()) continue;
      if (Entails(nli, joined[other], summaries[e][s], options)) ++n;
    }
    counts[i] = static_cast<double>(n);
  });

  std::vector<double> out(summaries.size(), 0.0);
  for (std::size_t i = 0; i < items.size(); ++i) out[items[i].first] += counts[i];
  for (std::size_t e = 0; e < summaries.size(); ++e) {
    if (!summaries[e].empty()) {
      out[e] /= static_cast<double>(summaries[e].size());
    }
  }
  return out;
}

AttributionResult AttributionSupport(std::span<const AttributedSentence> summary,
                                     const EntailmentClient& nli,
                                     const NliEvalOptions& options) {
  if (summary.empty()) return {};
  std::vector<double> best(summary.size(), 0.0);
  for (const AttributedSentence& s : summary) {
    bool any = false;
    for (const auto& cluster : s.evidence) any = any || !cluster.empty();
    if (!any) throw Error("summary sentence has no evidence: " + s.text);
  }
  internal::ParallelFor(summary.size(), options.parallelism, [&](std::size_t i) {
    const AttributedSentence& s = summary[i];
    for (const auto& cluster : s.evidence) {
      if (cluster.empty()) continue;
      std::size_t supporters = 0;
      for (const std::string& member : cluster) {
        if (Entails(nli, member, s.text, options) ||
            Entails(nli, s.text, member, options)) {
          ++supporters;
        }
      }
      best[i] = std::max(best[i], static_cast<double>(supporters) /
                                      static_cast<double>(cluster.size()));
    }
  });
  AttributionResult result;
  for (double ratio : best) {
    if (ratio > 0.0) result.partial_pct += 1.0;
    if (ratio >= 0.5) result.majority_pct += 1.0;
  }
  const double n = static_cast<double>(summary.size());
  result.partial_pct *= 100.0 / n;
  result.majority_pct *= 100.0 / n;
  return result;
}

PairSimilarity TfidfPairSimilarity(const Vectorizer& vectorizer) {
  return [&vectorizer](std::size_t a, std::size_t b) {
    return vectorizer.Sim(a, b);
  };
}

PairSimilarity NliPairSimilarity(const Corpus& corpus,
                                 const EntailmentClient& nli, int max_retries) {
  return [&corpus, &nli, max_retries](std::size_t a, std::size_t b) {
    const std::string& ta = corpus.sentences()[a].text;
    const std::string& tb = corpus.sentences()[b].text;
    return 0.5 * (PEntailWithRetry(nli, ta, tb, max_retries, "cluster quality") +
                  PEntailWithRetry(nli, tb, ta, max_retries, "cluster quality"));
  };
}

ClusterQuality EvaluateClusters(
    std::span<const std::vector<std::size_t>> clusters,
    const PairSimilarity& similarity, std::uint64_t seed,
    std::size_t max_pairs) {
  double within_total = 0.0;
  double cross_total = 0.0;
  double members = 0.0;
  std::size_t non_empty = 0;
  for (const auto& c : clusters) {
    const double n = static_cast<double>(c.size());
    within_total += Comb2(n);
    cross_total += members * n;
    members += n;
    if (!c.empty()) ++non_empty;
  }
  if (within_total == 0.0) {
    throw Error("purity is undefined: every cluster is a singleton");
  }
  if (non_empty < 2) {
    throw Error("colocation needs at least two non-empty clusters");
  }

  ClusterQuality q;
  Rng rng = MakeRng(seed, "cluster_quality");
  double purity_sum = 0.0;
  double coloc_sum = 0.0;

  if (within_total <= static_cast<double>(max_pairs)) {
    for (const auto& c : clusters) {
      for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = a + 1; b < c.size(); ++b) {
          if (c[a] == c[b]) continue;
          purity_sum += similarity(c[a], c[b]);
          ++q.purity_pairs;
        }
      }
    }
  } else {
    q.sampled = true;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& c : clusters) {
      acc += Comb2(static_cast<double>(c.size()));
      cumulative.push_back(acc);
    }
    std::uniform_real_distribution<double> pick(0.0, acc);
    while (q.purity_pairs < max_pairs) {
      const std::size_t ci = std::min<std::size_t>(
          static_cast<std::size_t>(
              std::upper_bound(cumulative.begin(), cumulative.end(), pick(rng)) -
              cumulative.begin()),
          clusters.size() - 1);
      const auto& c = clusters[ci];
      if (c.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> first(0, c.size() - 1);
      std::uniform_int_distribution<std::size_t> second(0, c.size() - 2);
      const std::size_t a = first(rng);
      std::size_t b = second(rng);
      if (b >= a) ++b;
      if (c[a] == c[b]) continue;
      purity_sum += similarity(c[a], c[b]);
      ++q.purity_pairs;
    }
  }

  if (cross_total <= static_cast<double>(max_pairs)) {
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        for (std::size_t a : clusters[i]) {
          for (std::size_t b : clusters[j]) {
            if (a == b) continue;
            coloc_sum += similarity(a, b);
            ++q.colocation_pairs;
          }
        }
      }
    }
  } else {
    // Ordered pairs of memberships drawn uniformly, rejecting same-cluster
    // draws, are uniform over cross-cluster pairs.
    q.sampled = true;
    std::vector<std::pair<std::size_t, std::size_t>> flat;  // (cluster, item)
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t item : clusters[i]) flat.push_back({i, item});
    }
    std::uniform_int_distribution<std::size_t> pick(0, flat.size() - 1);
    while (q.colocation_pairs < max_pairs) {
      const auto& x = flat[pick(rng)];
      const auto& y = flat[pick(rng)];
      if (x.first == y.first || x.second == y.second) continue;
      coloc_sum += similarity(x.second, y.second);
      ++q.colocation_pairs;
    }
  }

  if (q.purity_pairs == 0) {
    throw Error("purity is undefined: no distinct within-cluster pairs");
  }
  if (q.colocation_pairs == 0) {
    throw Error("colocation is undefined: no distinct cross-cluster pairs");
  }
  q.purity = purity_sum / static_cast<double>(q.purity_pairs);
  q.colocation = coloc_sum / static_cast<double>(q.colocation_pairs);
  q.quality = q.purity - q.colocation;
  return q;
}

double AdjustedRandIndex(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error("adjusted Rand index needs labelings of equal length");
  }
  if (a.size() < 2) throw Error("adjusted Rand index needs at least two items");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [_, n] : table) index += Comb2(n);
  for (const auto& [_, n] : rows) sum_a += Comb2(n);
  for (const auto& [_, n] : cols) sum_b += Comb2(n);
  const double expected = sum_a * sum_b / Comb2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  // Both partitions trivial in the same way: agreement is perfect.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double AdjustedRandIndex(const std::map<std::string, int>& a,
                         const std::map<std::string, int>& b) {
  std::vector<int> la, lb;
  for (const auto& [id, label] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    la.push_back(label);
    lb.push_back(it->second);
  }
  return AdjustedRandIndex(la, lb);
}

double Rouge2F1(std::string_view candidate, std::string_view reference) {
  const auto c = Tokenize(candidate);
  const auto r = Tokenize(reference);
  if (c.size() < 2 || r.size() < 2) {
    return !c.empty() && c == r ? 1.0 : 0.0;
  }
  std::map<std::pair<std::string, std::string>, int> ref_counts;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) ++ref_counts[{r[i], r[i + 1]}];
  double overlap = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    auto it = ref_counts.find({c[i], c[i + 1]});
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      overlap += 1.0;
    }
  }
  if (overlap == 0.0) return 0.0;
  const double p = overlap / static_cast<double>(c.size() - 1);
  const double rec = overlap / static_cast<double>(r.size() - 1);
  return 2.0 * p * rec / (p + rec);
}

double RougeLF1(std::string_view candidate, std::string_view reference) {
  const auto c = Tokenize(candidate);
  const auto r = Tokenize(reference);
  if (c.empty() || r.empty()) return 0.0;
  std::vector<std::size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
  for (std::size_t i = 1; i <= c.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      cur[j] = c[i - 1] == r[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[r.size()]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(c.size());
  const double rec = lcs / static_cast<double>(r.size());
  return 2.0 * p * rec / (p + rec);
}

double Rouge(std::string_view candidate,
             std::span<const std::string> references, RougeVariant variant) {
  double best = 0.0;
  for (const std::string& ref : references) {
    best = std::max(best, variant == RougeVariant::kR2F1
                              ? Rouge2F1(candidate, ref)
                              : RougeLF1(candidate, ref));
  }
  return best;
}

void EvalReport::Aggregate() {
  aggregate = EntityEval();
  aggregate.entity_id = "mean";
  if (entities.empty()) return;
  double r2 = 0.0, rl = 0.0;
  std::size_t with_rouge = 0;
  for (const EntityEval& e : entities) {
    aggregate.prevalence += e.prevalence;
    aggregate.genericness += e.genericness;
    aggregate.sap += e.sap;
    aggregate.partial_support_pct += e.partial_support_pct;
    aggregate.majority_support_pct += e.majority_support_pct;
    if (e.rouge2_f1 && e.rougeL_f1) {
      r2 += *e.rouge2_f1;
      rl += *e.rougeL_f1;
      ++with_rouge;
    }
  }
  const double n = static_cast<double>(entities.size());
  aggregate.prevalence /= n;
  aggregate.genericness /= n;
  aggregate.sap /= n;
  aggregate.partial_support_pct /= n;
  aggregate.majority_support_pct /= n;
  if (with_rouge > 0) {
    aggregate.rouge2_f1 = r2 / static_cast<double>(with_rouge);
    aggregate.rougeL_f1 = rl / static_cast<double>(with_rouge);
  }
}

json EvalReport::ToJson() const {
  json per_entity = json::array();
  for (const EntityEval& e : entities) per_entity.push_back(EntityToJson(e));
  json depth_json = json::array();
  for (const auto& [depth, q] : depth_quality) {
    depth_json.push_back({{"depth", depth},
                          {"purity", q.purity},
                          {"colocation", q.colocation},
                          {"quality", q.quality},
                          {"purity_pairs", q.purity_pairs},
                          {"colocation_pairs", q.colocation_pairs},
                          {"sampled", q.sampled}});
  }
  return {{"alpha_sap", alpha_sap},
          {"nli_backend", nli_backend},
          {"similarity_mode", similarity_mode},
          {"entities", std::move(per_entity)},
          {"aggregate", EntityToJson(aggregate)},
          {"depth_quality", std::move(depth_json)},
          {"ari", OptionalToJson(ari)},
          {"config", config}};
}

EvalReport EvalReport::FromJson(const json& j) {
  EvalReport r;
  try {
    r.alpha_sap = j.at("alpha_sap").get<double>();
    r.nli_backend = j.at("nli_backend").get<std::string>();
    r.similarity_mode = j.value("similarity_mode", "");
    for (const json& e : j.at("entities")) r.entities.push_back(EntityFromJson(e));
    r.aggregate = EntityFromJson(j.at("aggregate"));
    for (const json& c : j.value("depth_quality", json::array())) {
      ClusterQuality q;
      q.purity = c.at("purity").get<double>();
      q.colocation = c.at("colocation").get<double>();
      q.quality = c.at("quality").get<double>();
      q.purity_pairs = c.value("purity_pairs", std::size_t{0});
      q.colocation_pairs = c.value("colocation_pairs", std::size_t{0});
      q.sampled = c.value("sampled", false);
      r.depth_quality[c.at("depth").get<std::size_t>()] = q;
    }
    r.ari = OptionalFromJson(j, "ari");
    r.config = j.value("config", json::object());
  } catch (const json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
  return r;
}

std::string EvalReport::ToCsv() const {
  std::string out =
      "entity_id,prevalence,genericness,sap,rouge2_f1,rougeL_f1,"
      "partial_support_pct,majority_support_pct\n";
  auto row = [&out](const EntityEval& e) {
    out += e.entity_id + "," + FormatNumber(e.prevalence) + "," +
           FormatNumber(e.genericness) + "," + FormatNumber(e.sap) + "," +
           FormatOptional(e.rouge2_f1) + "," + FormatOptional(e.rougeL_f1) +
           "," + FormatNumber(e.partial_support_pct) + "," +
           FormatNumber(e.majority_support_pct) + "\n";
  };
  for (const EntityEval& e : entities) row(e);
  row(aggregate);
  return out;
}

}  // namespace hiro
