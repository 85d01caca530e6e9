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

#include "hiro/generation.h"

#include <algorithm>
#include <numeric>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hiro/evalmetrics.h"
#include "parallel.h"

namespace hiro {
namespace internal {
const std::map<std::string, std::string>& BuiltinPrompts();
}  // namespace internal

namespace {

using nlohmann::json;

constexpr std::string_view kEntityPlaceholder = "{entity name}";
constexpr std::string_view kInputPlaceholder = "[...]";

void ReplaceAll(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string JoinLines(std::span<const std::string> lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

std::vector<std::string> Texts(std::span<const std::string> ids,
                               const Corpus& corpus) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(corpus.sentence(id).text);
  return out;
}

std::string ReadPrompt(const std::filesystem::path& path) {
  std::string s = ReadFile(path);
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

// Evenly spaced subset of `n` positions keeping `m` of them.
std::vector<std::size_t> EvenSubsample(std::size_t n, std::size_t m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(i * n / m);
  return out;
}

}  // namespace

PromptSet PromptSet::Builtin() {
  const auto& p = internal::BuiltinPrompts();
  return {p.at("zero_shot"), p.at("sent"), p.at("doc")};
}

PromptSet PromptSet::FromDirectory(const std::filesystem::path& dir) {
  return {ReadPrompt(dir / "zero_shot.txt"), ReadPrompt(dir / "sent.txt"),
          ReadPrompt(dir / "doc.txt")};
}

std::string RenderClusterPrompt(std::string_view tmpl,
                                std::string_view entity_name,
                                std::span<const std::string> sentences) {
  std::string out(tmpl);
  ReplaceAll(out, kEntityPlaceholder, entity_name);
  ReplaceAll(out, kInputPlaceholder, JoinLines(sentences));
  return out;
}

std::string RenderZeroShotPrompt(std::string_view tmpl,
                                 std::span<const std::string> reviews) {
  std::string out(tmpl);
  // A run of "Review:\n[...]\n" blocks, or one block carrying a repeat
  // marker such as "[...] (x8)".
  static const std::regex kBlocks(R"((Review:\n\[\.\.\.\]( \(x\d+\))?\n)+)");
  std::smatch m;
  if (!std::regex_search(out, m, kBlocks)) {
    ReplaceAll(out, kInputPlaceholder, JoinLines(reviews));
    return out;
  }
  std::string blocks;
  for (const std::string& r : reviews) blocks += "Review:\n" + r + "\n";
  out.replace(static_cast<std::size_t>(m.position(0)),
              static_cast<std::size_t>(m.length(0)), blocks);
  return out;
}

std::string ToString(SummaryMode mode) {
  switch (mode) {
    case SummaryMode::kExt:
      return "ext";
    case SummaryMode::kSent:
      return "sent";
    case SummaryMode::kDoc:
      return "doc";
    case SummaryMode::kZeroShot:
      return "zero_shot";
  }
  return "ext";
}

SummaryMode ParseSummaryMode(std::string_view s) {
  if (s == "ext") return SummaryMode::kExt;
  if (s == "sent") return SummaryMode::kSent;
  if (s == "doc") return SummaryMode::kDoc;
  if (s == "zero_shot") return SummaryMode::kZeroShot;
  throw Error("unknown summary mode: " + std::string(s));
}

std::string Summary::Text() const {
  std::string out;
  for (const std::string& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

std::size_t CentroidSentence(std::span<const std::string> sentences) {
  if (sentences.empty()) throw Error("centroid of an empty cluster");
  if (sentences.size() == 1) return 0;
  const std::size_t n = sentences.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // R-2 F1 is symmetric, so one evaluation serves both members.
      const double r = Rouge2F1(sentences[i], sentences[j]);
      total[i] += r;
      total[j] += r;
    }
  }
  return static_cast<std::size_t>(
      std::max_element(total.begin(), total.end()) - total.begin());
}

std::vector<std::string> OrderByCentrality(std::span<const std::string> ids,
                                           const Corpus& corpus,
                                           const Vectorizer& vectorizer) {
  std::vector<std::size_t> idx;
  for (const std::string& id : ids) idx.push_back(corpus.SentenceIndex(id));
  std::vector<double> centrality(ids.size(), 0.0);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (a != b) centrality[a] += vectorizer.Sim(idx[a], idx[b]);
    }
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centrality[a] > centrality[b];
  });
  std::vector<std::string> out;
  for (std::size_t i : order) out.push_back(ids[i]);
  return out;
}

std::string FirstSentence(std::string_view text) {
  std::string_view first = text.substr(0, text.find('\n'));
  auto sentences = SplitSentences(first);
  return sentences.empty() ? std::string() : sentences.front();
}

Summary SummarizeExt(const ClusterSelection& selection, const Corpus& corpus) {
  Summary summary;
  summary.entity_id = selection.entity_id;
  summary.mode = SummaryMode::kExt;
  summary.model = "extractive";
  if (selection.clusters.empty()) {
    summary.warnings.push_back("empty selection");
    return summary;
  }
  for (const Cluster& c : selection.clusters) {
    const auto texts = Texts(c.sentence_ids, corpus);
    summary.sentences.push_back(texts[CentroidSentence(texts)]);
    summary.evidence.push_back(c.sentence_ids);
  }
  return summary;
}

Summary SummarizeSent(const ClusterSelection& selection, const Corpus& corpus,
                      const Vectorizer& vectorizer, const LlmClient& llm,
                      std::string_view entity_name,
                      const GenerationOptions& options) {
  Summary summary;
  summary.entity_id = selection.entity_id;
  summary.mode = SummaryMode::kSent;
  summary.model = llm.id();
  summary.temperature = options.temperature;
  summary.sample = options.sample;
  if (selection.clusters.empty()) {
    summary.warnings.push_back("empty selection");
    return summary;
  }
  const std::size_t n = selection.clusters.size();
  std::vector<std::string> responses(n);
  internal::ParallelFor(n, options.parallelism, [&](std::size_t i) {
    const auto ordered =
        OrderByCentrality(selection.clusters[i].sentence_ids, corpus, vectorizer);
    LlmRequest request{
        .prompt = RenderClusterPrompt(options.prompts.sent, entity_name,
                                      Texts(ordered, corpus)),
        .max_words = 10,
        .temperature = options.temperature,
        .sample = options.sample};
    responses[i] = CompleteWithRetry(llm, request, options.max_retries);
  });
  for (std::size_t i = 0; i < n; ++i) {
    std::string sentence = FirstSentence(responses[i]);
    if (sentence.empty()) {
      sentence = kPlaceholderSentence;
      summary.warnings.push_back("empty completion for cluster " +
                                 selection.clusters[i].subpath.ToString());
    }
    summary.sentences.push_back(std::move(sentence));
    summary.evidence.push_back(selection.clusters[i].sentence_ids);
  }
  return summary;
}

Summary SummarizeDoc(const ClusterSelection& selection, const Corpus& corpus,
                     const Vectorizer& vectorizer, const LlmClient& llm,
                     std::string_view entity_name,
                     const GenerationOptions& options) {
  if (selection.clusters.empty()) {
    throw Error("cannot summarize entity " + selection.entity_id +
                ": empty selection");
  }
  Summary summary;
  summary.entity_id = selection.entity_id;
  summary.mode = SummaryMode::kDoc;
  summary.model = llm.id();
  summary.temperature = options.temperature;
  summary.sample = options.sample;

  // Cluster order, central sentences first, each sentence once.
  std::vector<std::vector<std::string>> inputs;
  std::unordered_set<std::string> seen;
  std::size_t chars = 0;
  for (const Cluster& c : selection.clusters) {
    summary.evidence.push_back(c.sentence_ids);
    std::vector<std::string> texts;
    for (const std::string& id :
         OrderByCentrality(c.sentence_ids, corpus, vectorizer)) {
      if (!seen.insert(id).second) continue;
      texts.push_back(corpus.sentence(id).text);
      chars += texts.back().size() + 1;
    }
    inputs.push_back(std::move(texts));
  }

  if (options.char_budget > 0 && chars > options.char_budget) {
    summary.truncated = true;
    double keep = static_cast<double>(options.char_budget) /
                  static_cast<double>(chars);
    std::vector<std::vector<std::string>> reduced;
    for (;;) {
      reduced.clear();
      std::size_t used = 0;
      bool at_floor = true;
      for (const auto& texts : inputs) {
        if (texts.empty()) {
          reduced.emplace_back();
          continue;
        }
        const std::size_t m = std::clamp<std::size_t>(
            static_cast<std::size_t>(keep * static_cast<double>(texts.size())),
            1, texts.size());
        at_floor = at_floor && m == 1;
        std::vector<std::string> kept;
        for (std::size_t i : EvenSubsample(texts.size(), m)) {
          kept.push_back(texts[i]);
          used += texts[i].size() + 1;
        }
        reduced.push_back(std::move(kept));
      }
      // One sentence per cluster is the floor.
      if (used <= options.char_budget || at_floor) break;
      keep *= 0.9;
    }
    std::size_t before = 0, after = 0;
    for (const auto& t : inputs) before += t.size();
    for (const auto& t : reduced) after += t.size();
    summary.warnings.push_back("input truncated from " + std::to_string(before) +
                               " to " + std::to_string(after) + " sentences");
    inputs = std::move(reduced);
  }

  std::vector<std::string> lines;
  for (const auto& texts : inputs) lines.insert(lines.end(), texts.begin(), texts.end());
  LlmRequest request{
      .prompt = RenderClusterPrompt(options.prompts.doc, entity_name, lines),
      .max_words = 60,
      .temperature = options.temperature,
      .sample = options.sample};
  const std::string response = CompleteWithRetry(llm, request, options.max_retries);
  std::string first_line_free = response;
  std::replace(first_line_free.begin(), first_line_free.end(), '\n', ' ');
  summary.sentences = SplitSentences(first_line_free);
  if (summary.sentences.empty()) {
    summary.sentences.push_back(kPlaceholderSentence);
    summary.warnings.push_back("empty completion");
  }
  return summary;
}

Summary SummarizeZeroShot(std::string_view entity_id,
                          std::span<const std::string> reviews,
                          const LlmClient& llm,
                          const GenerationOptions& options) {
  Summary summary;
  summary.entity_id = std::string(entity_id);
  summary.mode = SummaryMode::kZeroShot;
  summary.model = llm.id();
  summary.temperature = options.temperature;
  summary.sample = options.sample;
  LlmRequest request{.prompt = RenderZeroShotPrompt(options.prompts.zero_shot,
                                                    reviews),
                     .max_words = 70,
                     .temperature = options.temperature,
                     .sample = options.sample};
  std::string response = CompleteWithRetry(llm, request, options.max_retries);
  std::replace(response.begin(), response.end(), '\n', ' ');
  summary.sentences = SplitSentences(response);
  if (summary.sentences.empty()) {
    summary.sentences.push_back(kPlaceholderSentence);
    summary.warnings.push_back("empty completion");
  }
  return summary;
}

std::string SummariesToJsonl(std::span<const Summary> summaries) {
  std::string out;
  for (const Summary& s : summaries) {
    json line = {{"entity_id", s.entity_id},
                 {"mode", ToString(s.mode)},
                 {"sample", s.sample},
                 {"text", s.Text()},
                 {"sentences", s.sentences},
                 {"evidence", s.evidence},
                 {"model", s.model},
                 {"temperature", s.temperature},
                 {"warnings", s.warnings},
                 {"truncated", s.truncated}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<Summary> SummariesFromJsonl(std::string_view text) {
  std::vector<Summary> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Summary s;
      s.entity_id = j.at("entity_id").get<std::string>();
      s.mode = ParseSummaryMode(j.at("mode").get<std::string>());
      s.sample = j.value("sample", 0);
      s.sentences = j.at("sentences").get<std::vector<std::string>>();
      s.evidence = j.value("evidence", std::vector<std::vector<std::string>>{});
      s.model = j.value("model", "");
      s.temperature = j.value("temperature", 0.0);
      s.warnings = j.value("warnings", std::vector<std::string>{});
      s.truncated = j.value("truncated", false);
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error("summaries line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hiro
