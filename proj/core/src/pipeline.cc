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

#include "hiro/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "hiro/corpus.h"
#include "hiro/evalmetrics.h"
#include "hiro/generation.h"
#include "hiro/retriever.h"
#include "hiro/serialization.h"
#include "json_fields.h"

namespace hiro {
namespace {

using nlohmann::json;
using internal::CheckKeys;
using internal::ReadField;

constexpr char kManifest[] = "run_manifest.json";

// ---------------------------------------------------------------------------
// Config parsing.

void ReadPath(const json& j, const char* key, std::filesystem::path& out) {
  std::string s;
  if (ReadField(j, key, s)) out = s;
}

json Section(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) return json::object();
  if (!it->is_object()) throw Error(std::string(name) + " must be a JSON object");
  return *it;
}

// ---------------------------------------------------------------------------
// Stage graph.

struct StageSpec {
  Stage stage;
  std::vector<Stage> deps;
};

const std::vector<StageSpec>& Graph() {
  static const std::vector<StageSpec> graph = {
      {Stage::kIngest, {}},
      {Stage::kMinePairs, {Stage::kIngest}},
      {Stage::kTrain, {Stage::kIngest, Stage::kMinePairs}},
      {Stage::kIndex, {Stage::kIngest, Stage::kTrain}},
      {Stage::kRetrieve, {Stage::kIngest, Stage::kIndex}},
      {Stage::kSummarize, {Stage::kIngest, Stage::kRetrieve}},
      {Stage::kEvaluate,
       {Stage::kIngest, Stage::kIndex, Stage::kRetrieve, Stage::kSummarize}},
      {Stage::kReport, {Stage::kRetrieve, Stage::kEvaluate}},
  };
  return graph;
}

const std::vector<Stage>& Deps(Stage s) {
  for (const StageSpec& spec : Graph()) {
    if (spec.stage == s) return spec.deps;
  }
  throw Error("unknown stage");
}

// Settings each stage's outputs depend on, beyond its inputs.
json StageSettings(Stage stage, const PipelineConfig& c) {
  const json all = c.ToJson();
  json s = {{"seed", c.seed}};
  switch (stage) {
    case Stage::kIngest:
      s["corpus"] = all["paths"]["corpus"];
      break;
    case Stage::kMinePairs:
      s["pairing"] = all["pairing"];
      s["nli"] = all["nli"];
      break;
    case Stage::kTrain:
      s["embeddings"] = all["embeddings"];
      s["quantizer"] = all["quantizer"];
      s["paths"] = {{"embeddings", all["paths"]["embeddings"]},
                    {"model", all["paths"]["model"]}};
      break;
    case Stage::kIndex:
      break;
    case Stage::kRetrieve:
      s["retrieval"] = all["retrieval"];
      break;
    case Stage::kSummarize:
      s["generation"] = all["generation"];
      break;
    case Stage::kEvaluate:
      s["eval"] = all["eval"];
      s["nli"] = all["nli"];
      break;
    case Stage::kReport:
      break;
  }
  return s;
}

std::string UtcNow() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Digests of files from outside the outputs directory that a stage reads.
json ExternalInputs(Stage stage, const PipelineConfig& c) {
  json inputs = json::object();
  if (stage == Stage::kIngest) {
    if (c.corpus_path.empty()) throw Error("paths.corpus is required");
    inputs["corpus"] = FileDigest(c.Resolve(c.corpus_path));
  }
  if (stage == Stage::kTrain && !c.model_path.empty()) {
    inputs["pretrained_model"] = FileDigest(c.Resolve(c.model_path));
  }
  if (stage == Stage::kTrain && c.embeddings.mode == "file" &&
      !c.embeddings_path.empty()) {
    inputs["embeddings_manifest"] = FileDigest(c.Resolve(c.embeddings_path));
  }
  return inputs;
}

// ---------------------------------------------------------------------------
// Run manifest: what each stage consumed and produced.

class Manifest {
 public:
  explicit Manifest(const PipelineConfig& config) : config_(config) {
    const auto path = config.Output(kManifest);
    if (std::filesystem::exists(path)) {
      try {
        doc_ = json::parse(ReadFile(path));
      } catch (const json::parse_error& e) {
        throw Error("corrupt run manifest " + path.string() + ": " + e.what());
      }
    }
    if (!doc_.is_object()) doc_ = json::object();
    if (!doc_.contains("stages")) doc_["stages"] = json::object();
  }

  // Throws unless `stage` and everything upstream of it ran with the current
  // settings and their outputs are untouched.
  void RequireFresh(Stage stage) const {
    for (Stage dep : Deps(stage)) {
      RequireFresh(dep);
      CheckStage(dep);
    }
  }

  // Names and digests of the outputs of `stage`'s direct dependencies.
  json InputDigests(Stage stage) const {
    json inputs = ExternalInputs(stage, config_);
    for (Stage dep : Deps(stage)) {
      for (const auto& [name, digest] : Entry(dep).at("outputs").items()) {
        inputs[name] = digest;
      }
    }
    return inputs;
  }

  void Record(Stage stage, json inputs, const std::vector<std::string>& outputs) {
    json out = json::object();
    for (const std::string& name : outputs) {
      out[name] = FileDigest(config_.Output(name));
    }
    doc_["tool_version"] = kToolVersion;
    doc_["seed"] = config_.seed;
    doc_["config"] = config_.ToJson();
    doc_["stages"][ToString(stage)] = {
        {"settings_digest", Sha256Hex(StageSettings(stage, config_).dump())},
        {"inputs", std::move(inputs)},
        {"outputs", std::move(out)},
        {"completed_at", UtcNow()}};
    WriteFileAtomic(config_.Output(kManifest), doc_.dump(1) + "\n");
  }

 private:
  const json& Entry(Stage stage) const {
    const std::string name = ToString(stage);
    auto it = doc_["stages"].find(name);
    if (it == doc_["stages"].end()) {
      throw Error("missing output of stage '" + name + "'; run `hiro " + name +
                  "` first");
    }
    return *it;
  }

  void CheckStage(Stage stage) const {
    const std::string name = ToString(stage);
    const json& entry = Entry(stage);
    auto stale = [&](const std::string& why) {
      return Error("stage '" + name + "' is stale (" + why + "); rerun `hiro " +
                   name + "`");
    };
    if (entry.at("settings_digest").get<std::string>() !=
        Sha256Hex(StageSettings(stage, config_).dump())) {
      throw stale("its settings changed");
    }
    for (const auto& [file, digest] : entry.at("outputs").items()) {
      const auto path = config_.Output(file);
      if (!std::filesystem::exists(path)) {
        throw Error("missing output of stage '" + name + "' (" + file +
                    "); rerun `hiro " + name + "`");
      }
      if (FileDigest(path) != digest.get<std::string>()) {
        throw stale(file + " was modified");
      }
    }
    const json current = InputDigests(stage);
    if (entry.at("inputs") != current) throw stale("an upstream stage was rerun");
  }

  const PipelineConfig& config_;
  json doc_;
};

// ---------------------------------------------------------------------------
// Helpers shared by stages.

std::unique_ptr<EntailmentClient> MakeNli(const PipelineConfig& c) {
  if (c.nli.backend == "jaccard") {
    return std::make_unique<JaccardEntailment>(c.nli_min_overlap);
  }
  return MakeEntailmentClient(c.nli);
}

Corpus LoadCorpus(const PipelineConfig& c) {
  return Corpus::Load(c.Output("corpus.json"));
}

std::vector<ClusterSelection> LoadSelections(const PipelineConfig& c) {
  return SelectionsFromJson(ReadFile(c.Output("selections.json")));
}

std::string SampleFile(int sample) {
  return "summaries_sample" + std::to_string(sample) + ".jsonl";
}

std::vector<std::vector<std::string>> ReviewTexts(const Corpus& corpus,
                                                  std::size_t entity) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t r : corpus.EntityReviews(entity)) {
    std::vector<std::string> texts;
    for (std::size_t s : corpus.ReviewSentences(r)) {
      texts.push_back(corpus.sentences()[s].text);
    }
    out.push_back(std::move(texts));
  }
  return out;
}

std::vector<std::string> Texts(const Corpus& corpus,
                               const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (const std::string& id : ids) out.push_back(corpus.sentence(id).text);
  return out;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Stages. Each returns the names of the files it wrote.

std::vector<std::string> RunIngest(const PipelineConfig& c) {
  if (c.corpus_path.empty()) throw Error("paths.corpus is required");
  IngestJsonl(c.Resolve(c.corpus_path)).Save(c.Output("corpus.json"));
  return {"corpus.json"};
}

std::vector<std::string> RunMinePairs(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  const Vectorizer vectorizer = Vectorizer::Build(corpus);
  const auto nli = MakeNli(c);
  const auto pairs = MinePairs(corpus, vectorizer, *nli, c.pairing,
                               SubstreamSeed(c.seed, "pairing"));
  WriteFileAtomic(c.Output("pairs.jsonl"), PairsToJsonl(pairs));
  return {"pairs.jsonl"};
}

std::vector<std::string> RunTrain(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  EmbeddingOptions eo = c.embeddings;
  if (!c.embeddings_path.empty()) eo.manifest = c.Resolve(c.embeddings_path);
  eo.seed = SubstreamSeed(c.seed, "embeddings");
  const EmbeddingTable table = ResolveEmbeddings(corpus, eo);
  if (table.dim() != c.quantizer.dim) {
    throw Error("embeddings have dimension " + std::to_string(table.dim()) +
                " but quantizer.dim is " + std::to_string(c.quantizer.dim));
  }
  table.Save(c.Output("embeddings.json"));

  TrainResult result;
  if (!c.model_path.empty()) {
    result.model = QuantizerModel::Load(c.Resolve(c.model_path));
    if (result.model.dim() != table.dim()) {
      throw Error("pre-trained model dimension does not match the embeddings");
    }
  } else {
    const Vectorizer vectorizer = Vectorizer::Build(corpus);
    const auto pairs = PairsFromJsonl(ReadFile(c.Output("pairs.jsonl")));
    const LexicalSimilarity similarity = [&](const std::string& a,
                                             const std::string& b) {
      return vectorizer.Sim(corpus.SentenceIndex(a), corpus.SentenceIndex(b));
    };
    result = Train(
        QuantizerModel::Initialize(c.quantizer, SubstreamSeed(c.seed, "init")),
        pairs, table, similarity, SubstreamSeed(c.seed, "training"));
  }
  result.model.Save(c.Output("model.json"));
  WriteFileAtomic(c.Output("train_log.jsonl"), TrainLogToJsonl(result.log));
  return {"embeddings.json", "embeddings.bin", "model.json", "train_log.jsonl"};
}

std::vector<std::string> RunIndex(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  const auto model = QuantizerModel::Load(c.Output("model.json"));
  const auto table = EmbeddingTable::Load(c.Output("embeddings.json"));
  const IndexedCorpus index = IndexCorpus(model, corpus, table);
  WriteFileAtomic(c.Output("assignments.jsonl"),
                  AssignmentsToJsonl(index.assignments()));
  return {"assignments.jsonl"};
}

std::vector<std::string> RunRetrieve(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  const IndexedCorpus index = IndexedCorpus::FromAssignments(
      AssignmentsFromJsonl(ReadFile(c.Output("assignments.jsonl"))));
  const Vectorizer vectorizer = Vectorizer::Build(corpus);
  std::vector<ClusterSelection> selections;
  for (const Entity& e : corpus.entities()) {
    ClusterSelection s =
        SelectTopK(index, e.id, c.retrieval.k, c.retrieval.alpha);
    if (c.retrieval.postprocess) {
      s = PostprocessClusters(s, corpus, vectorizer,
                              {c.retrieval.drop_threshold,
                               c.retrieval.merge_threshold});
    }
    selections.push_back(std::move(s));
  }
  WriteFileAtomic(c.Output("selections.json"), SelectionsToJson(selections));
  WriteFileAtomic(c.Output("depth_histogram.csv"),
                  DepthHistogramToCsv(DepthHistogram(selections)));
  return {"selections.json", "depth_histogram.csv"};
}

std::vector<std::string> RunSummarize(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  const auto selections = LoadSelections(c);
  const Vectorizer vectorizer = Vectorizer::Build(corpus);
  const SummaryMode mode = ParseSummaryMode(c.generation.mode);
  std::unique_ptr<LlmClient> llm;
  if (mode != SummaryMode::kExt) {
    LlmOptions lo = c.generation.llm;
    if (!lo.replay_path.empty()) lo.replay_path = c.Resolve(lo.replay_path);
    llm = MakeLlmClient(lo);
  }

  GenerationOptions go;
  go.temperature = c.generation.temperature;
  go.parallelism = c.generation.parallelism;
  go.max_retries = c.generation.max_retries;
  go.char_budget = c.generation.char_budget;
  if (!c.generation.prompts_dir.empty()) {
    go.prompts = PromptSet::FromDirectory(c.Resolve(c.generation.prompts_dir));
  }

  std::vector<std::string> written;
  for (int sample = 0; sample < c.generation.samples; ++sample) {
    go.sample = sample;
    std::vector<Summary> summaries;
    for (const ClusterSelection& sel : selections) {
      const Entity& entity =
          corpus.entities()[corpus.EntityIndex(sel.entity_id)];
      switch (mode) {
        case SummaryMode::kExt:
          summaries.push_back(SummarizeExt(sel, corpus));
          summaries.back().sample = sample;
          break;
        case SummaryMode::kSent:
          summaries.push_back(
              SummarizeSent(sel, corpus, vectorizer, *llm, entity.name, go));
          break;
        case SummaryMode::kDoc:
          summaries.push_back(
              SummarizeDoc(sel, corpus, vectorizer, *llm, entity.name, go));
          break;
        case SummaryMode::kZeroShot: {
          const std::size_t e = corpus.EntityIndex(entity.id);
          auto reviews = corpus.EntityReviews(e);
          std::vector<std::size_t> order(reviews.begin(), reviews.end());
          Rng rng = MakeRng(SubstreamSeed(c.seed, "sampling"),
                            entity.id + "/" + std::to_string(sample));
          std::shuffle(order.begin(), order.end(), rng);
          order.resize(std::min<std::size_t>(
              order.size(),
              static_cast<std::size_t>(std::max(c.generation.zero_shot_reviews, 1))));
          std::sort(order.begin(), order.end());
          std::vector<std::string> texts;
          for (std::size_t r : order) {
            std::string text;
            for (std::size_t s : corpus.ReviewSentences(r)) {
              if (!text.empty()) text += ' ';
              text += corpus.sentences()[s].text;
            }
            texts.push_back(std::move(text));
          }
          summaries.push_back(SummarizeZeroShot(entity.id, texts, *llm, go));
          break;
        }
      }
    }
    const std::string name = SampleFile(sample);
    WriteFileAtomic(c.Output(name), SummariesToJsonl(summaries));
    written.push_back(name);
  }
  return written;
}

std::map<std::string, std::vector<std::string>> LoadReferences(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> refs;
  std::istringstream in(ReadFile(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      auto& list = refs[j.at("entity_id").get<std::string>()];
      for (const auto& s : j.at("summaries")) list.push_back(s.get<std::string>());
    } catch (const json::exception& e) {
      throw Error("references line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return refs;
}

std::map<std::string, int> LoadReferenceClusters(
    const std::filesystem::path& path) {
  std::map<std::string, int> labels;
  std::istringstream in(ReadFile(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      labels[j.at("sentence_id").get<std::string>()] = j.at("label").get<int>();
    } catch (const json::exception& e) {
      throw Error("reference clusters line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return labels;
}

std::vector<std::string> RunEvaluate(const PipelineConfig& c) {
  const Corpus corpus = LoadCorpus(c);
  const auto selections = LoadSelections(c);
  const auto nli = MakeNli(c);
  NliEvalOptions no;
  no.threshold = c.eval.nli_threshold;
  no.parallelism = c.eval.parallelism;

  std::map<std::string, std::vector<std::string>> references;
  if (!c.eval.references.empty()) {
    references = LoadReferences(c.Resolve(c.eval.references));
  }

  EvalReport report;
  report.alpha_sap = c.eval.alpha_sap;
  report.nli_backend = nli->id();
  report.similarity_mode = c.eval.similarity;
  report.config = c.ToJson();

  std::vector<std::string> entity_ids;
  for (const auto& s : selections) entity_ids.push_back(s.entity_id);
  report.entities.resize(entity_ids.size());
  for (std::size_t e = 0; e < entity_ids.size(); ++e) {
    report.entities[e].entity_id = entity_ids[e];
  }

  const int samples = std::max(c.generation.samples, 1);
  for (int sample = 0; sample < samples; ++sample) {
    const auto summaries =
        SummariesFromJsonl(ReadFile(c.Output(SampleFile(sample))));
    if (summaries.size() != entity_ids.size()) {
      throw Error(SampleFile(sample) + " does not cover every entity; rerun "
                  "`hiro summarize`");
    }
    std::vector<std::vector<std::string>> sentences;
    for (std::size_t e = 0; e < summaries.size(); ++e) {
      if (summaries[e].entity_id != entity_ids[e]) {
        throw Error(SampleFile(sample) + " is out of order with selections.json");
      }
      sentences.push_back(summaries[e].sentences);
    }
    std::vector<double> generic(entity_ids.size(), 0.0);
    if (entity_ids.size() >= 2) generic = Genericness(sentences, *nli, no);

    for (std::size_t e = 0; e < summaries.size(); ++e) {
      const Summary& s = summaries[e];
      EntityEval& out = report.entities[e];
      const auto reviews =
          ReviewTexts(corpus, corpus.EntityIndex(s.entity_id));
      out.prevalence += Prevalence(s.sentences, reviews, *nli, no);
      out.genericness += generic[e];

      if (!s.evidence.empty() && !s.sentences.empty()) {
        std::vector<AttributedSentence> attributed;
        for (std::size_t i = 0; i < s.sentences.size(); ++i) {
          AttributedSentence a{s.sentences[i], {}};
          if (s.mode == SummaryMode::kDoc) {
            for (const auto& cluster : s.evidence) {
              a.evidence.push_back(Texts(corpus, cluster));
            }
          } else if (i < s.evidence.size()) {
            a.evidence.push_back(Texts(corpus, s.evidence[i]));
          }
          attributed.push_back(std::move(a));
        }
        const auto support = AttributionSupport(attributed, *nli, no);
        out.partial_support_pct += support.partial_pct;
        out.majority_support_pct += support.majority_pct;
      }

      auto ref = references.find(s.entity_id);
      if (ref != references.end()) {
        out.rouge2_f1 = out.rouge2_f1.value_or(0.0) +
                        Rouge(s.Text(), ref->second, RougeVariant::kR2F1);
        out.rougeL_f1 = out.rougeL_f1.value_or(0.0) +
                        Rouge(s.Text(), ref->second, RougeVariant::kRLF1);
      }
    }
  }
  for (EntityEval& e : report.entities) {
    const double n = static_cast<double>(samples);
    e.prevalence /= n;
    e.genericness /= n;
    e.partial_support_pct /= n;
    e.majority_support_pct /= n;
    if (e.rouge2_f1) *e.rouge2_f1 /= n;
    if (e.rougeL_f1) *e.rougeL_f1 /= n;
    e.sap = Sap(e.prevalence, e.genericness, c.eval.alpha_sap);
  }
  report.Aggregate();

  // Index quality: clusters are the sentence groups sharing each subpath.
  const IndexedCorpus index = IndexedCorpus::FromAssignments(
      AssignmentsFromJsonl(ReadFile(c.Output("assignments.jsonl"))));
  const Vectorizer vectorizer = Vectorizer::Build(corpus);
  const PairSimilarity similarity =
      c.eval.similarity == "nli"
          ? NliPairSimilarity(corpus, *nli, no.max_retries)
          : TfidfPairSimilarity(vectorizer);
  for (std::size_t d = 1; d <= index.depth(); ++d) {
    std::map<Path, std::vector<std::size_t>> groups;
    for (const Assignment& a : index.assignments()) {
      groups[a.path.Prefix(d)].push_back(corpus.SentenceIndex(a.sentence_id));
    }
    std::vector<std::vector<std::size_t>> clusters;
    for (auto& [_, members] : groups) clusters.push_back(std::move(members));
    try {
      report.depth_quality[d] =
          EvaluateClusters(clusters, similarity,
                           SubstreamSeed(c.seed, "eval/depth" + std::to_string(d)),
                           c.eval.max_pairs);
    } catch (const Error&) {
      // Undefined at this depth (all singletons or a single cluster).
    }
  }

  if (!c.eval.reference_clusters.empty()) {
    const auto reference = LoadReferenceClusters(c.Resolve(c.eval.reference_clusters));
    double total = 0.0;
    int counted = 0;
    for (const ClusterSelection& sel : selections) {
      std::map<std::string, int> predicted;
      for (std::size_t k = 0; k < sel.clusters.size(); ++k) {
        for (const std::string& id : sel.clusters[k].sentence_ids) {
          predicted.emplace(id, static_cast<int>(k));
        }
      }
      std::size_t shared = 0;
      for (const auto& [id, _] : predicted) shared += reference.count(id);
      if (shared < 2) continue;
      total += AdjustedRandIndex(predicted, reference);
      ++counted;
    }
    if (counted > 0) report.ari = total / counted;
  }

  WriteFileAtomic(c.Output("report.json"), report.ToJson().dump(1) + "\n");
  WriteFileAtomic(c.Output("report.csv"), report.ToCsv());
  return {"report.json", "report.csv"};
}

std::vector<std::string> RunReport(const PipelineConfig& c) {
  const EvalReport report =
      EvalReport::FromJson(json::parse(ReadFile(c.Output("report.json"))));
  const auto selections = LoadSelections(c);

  std::string md = "# Run report\n\n";
  md += "NLI backend: `" + report.nli_backend + "`, SAP alpha " +
        Fixed(report.alpha_sap, 2) + ", seed " + std::to_string(c.seed) +
        ".\n\n## Summaries\n\n";
  md += "| entity | prevalence | genericness | SAP | R-2 | R-L | partial % | "
        "majority % |\n|---|---|---|---|---|---|---|---|\n";
  auto row = [&md](const EntityEval& e) {
    auto opt = [](const std::optional<double>& v) {
      return v ? Fixed(*v, 4) : std::string("-");
    };
    md += "| " + e.entity_id + " | " + Fixed(e.prevalence, 4) + " | " +
          Fixed(e.genericness, 4) + " | " + Fixed(e.sap, 4) + " | " +
          opt(e.rouge2_f1) + " | " + opt(e.rougeL_f1) + " | " +
          Fixed(e.partial_support_pct, 1) + " | " +
          Fixed(e.majority_support_pct, 1) + " |\n";
  };
  for (const EntityEval& e : report.entities) row(e);
  row(report.aggregate);

  md += "\n## Index quality by depth (" + report.similarity_mode +
        " similarity)\n\n| depth | purity | colocation | quality |\n"
        "|---|---|---|---|\n";
  for (const auto& [d, q] : report.depth_quality) {
    md += "| " + std::to_string(d) + " | " + Fixed(q.purity, 4) + " | " +
          Fixed(q.colocation, 4) + " | " + Fixed(q.quality, 4) + " |\n";
  }
  if (report.ari) md += "\nMean ARI against reference clusters: " + Fixed(*report.ari, 4) + "\n";

  md += "\n## Selected subpaths by depth\n\n| depth | count |\n|---|---|\n";
  for (const auto& [d, n] : DepthHistogram(selections)) {
    md += "| " + std::to_string(d) + " | " + std::to_string(n) + " |\n";
  }
  WriteFileAtomic(c.Output("report.md"), md);
  return {"report.md"};
}

}  // namespace

// ---------------------------------------------------------------------------

PipelineConfig PipelineConfig::FromJson(const json& doc,
                                        const std::filesystem::path& base_dir) {
  CheckKeys(doc, "config",
            {"seed", "paths", "embeddings", "pairing", "nli", "quantizer",
             "retrieval", "generation", "eval"});
  PipelineConfig c;
  c.base_dir = base_dir;
  ReadField(doc, "seed", c.seed);

  const json paths = Section(doc, "paths");
  CheckKeys(paths, "paths", {"corpus", "embeddings", "model", "outputs"});
  ReadPath(paths, "corpus", c.corpus_path);
  ReadPath(paths, "embeddings", c.embeddings_path);
  ReadPath(paths, "model", c.model_path);
  ReadPath(paths, "outputs", c.outputs_path);

  const json emb = Section(doc, "embeddings");
  CheckKeys(emb, "embeddings", {"mode", "endpoint", "dim", "batch_size"});
  ReadField(emb, "mode", c.embeddings.mode);
  ReadField(emb, "endpoint", c.embeddings.endpoint);
  ReadField(emb, "dim", c.embeddings.dim);
  ReadField(emb, "batch_size", c.embeddings.batch_size);

  c.pairing = Section(doc, "pairing").get<PairingConfig>();

  const json nli = Section(doc, "nli");
  CheckKeys(nli, "nli", {"backend", "endpoint", "timeout_seconds", "min_overlap"});
  ReadField(nli, "backend", c.nli.backend);
  ReadField(nli, "endpoint", c.nli.endpoint);
  ReadField(nli, "timeout_seconds", c.nli.timeout_seconds);
  ReadField(nli, "min_overlap", c.nli_min_overlap);

  c.quantizer = Section(doc, "quantizer").get<QuantizerConfig>();

  const json ret = Section(doc, "retrieval");
  CheckKeys(ret, "retrieval",
            {"k", "alpha", "postprocess", "drop_threshold", "merge_threshold"});
  ReadField(ret, "k", c.retrieval.k);
  ReadField(ret, "alpha", c.retrieval.alpha);
  ReadField(ret, "postprocess", c.retrieval.postprocess);
  ReadField(ret, "drop_threshold", c.retrieval.drop_threshold);
  ReadField(ret, "merge_threshold", c.retrieval.merge_threshold);

  const json gen = Section(doc, "generation");
  CheckKeys(gen, "generation",
            {"mode", "temperature", "samples", "backend", "endpoint", "model",
             "constant_text", "replay_path", "prompts_dir", "parallelism",
             "max_retries", "char_budget", "zero_shot_reviews",
             "timeout_seconds"});
  GenerationConfig& g = c.generation;
  ReadField(gen, "mode", g.mode);
  ReadField(gen, "temperature", g.temperature);
  ReadField(gen, "samples", g.samples);
  ReadField(gen, "backend", g.llm.backend);
  ReadField(gen, "endpoint", g.llm.endpoint);
  ReadField(gen, "model", g.llm.model);
  ReadField(gen, "constant_text", g.llm.constant_text);
  ReadPath(gen, "replay_path", g.llm.replay_path);
  ReadPath(gen, "prompts_dir", g.prompts_dir);
  ReadField(gen, "parallelism", g.parallelism);
  ReadField(gen, "max_retries", g.max_retries);
  ReadField(gen, "char_budget", g.char_budget);
  ReadField(gen, "zero_shot_reviews", g.zero_shot_reviews);
  ReadField(gen, "timeout_seconds", g.llm.timeout_seconds);

  const json ev = Section(doc, "eval");
  CheckKeys(ev, "eval",
            {"alpha_sap", "similarity", "references", "reference_clusters",
             "nli_threshold", "parallelism", "max_pairs"});
  ReadField(ev, "alpha_sap", c.eval.alpha_sap);
  ReadField(ev, "similarity", c.eval.similarity);
  ReadPath(ev, "references", c.eval.references);
  ReadPath(ev, "reference_clusters", c.eval.reference_clusters);
  ReadField(ev, "nli_threshold", c.eval.nli_threshold);
  ReadField(ev, "parallelism", c.eval.parallelism);
  ReadField(ev, "max_pairs", c.eval.max_pairs);

  c.Validate();
  return c;
}

void ApplyOverride(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error("override must look like key=value: " + std::string(assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw Error("bad override key: " + key);
    if (!node->is_object()) throw Error("override " + key + " descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

PipelineConfig PipelineConfig::Load(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  for (const std::string& o : overrides) ApplyOverride(doc, o);
  std::filesystem::path base = path.parent_path();
  if (base.empty()) base = ".";
  return FromJson(doc, base);
}

json PipelineConfig::ToJson() const {
  return {
      {"seed", seed},
      {"paths",
       {{"corpus", corpus_path.string()},
        {"embeddings", embeddings_path.string()},
        {"model", model_path.string()},
        {"outputs", outputs_path.string()}}},
      {"embeddings",
       {{"mode", embeddings.mode},
        {"endpoint", embeddings.endpoint},
        {"dim", embeddings.dim},
        {"batch_size", embeddings.batch_size}}},
      {"pairing", pairing},
      {"nli",
       {{"backend", nli.backend},
        {"endpoint", nli.endpoint},
        {"timeout_seconds", nli.timeout_seconds},
        {"min_overlap", nli_min_overlap}}},
      {"quantizer", quantizer},
      {"retrieval",
       {{"k", retrieval.k},
        {"alpha", retrieval.alpha},
        {"postprocess", retrieval.postprocess},
        {"drop_threshold", retrieval.drop_threshold},
        {"merge_threshold", retrieval.merge_threshold}}},
      {"generation",
       {{"mode", generation.mode},
        {"temperature", generation.temperature},
        {"samples", generation.samples},
        {"backend", generation.llm.backend},
        {"endpoint", generation.llm.endpoint},
        {"model", generation.llm.model},
        {"constant_text", generation.llm.constant_text},
        {"replay_path", generation.llm.replay_path.string()},
        {"prompts_dir", generation.prompts_dir.string()},
        {"parallelism", generation.parallelism},
        {"max_retries", generation.max_retries},
        {"char_budget", generation.char_budget},
        {"zero_shot_reviews", generation.zero_shot_reviews},
        {"timeout_seconds", generation.llm.timeout_seconds}}},
      {"eval",
       {{"alpha_sap", eval.alpha_sap},
        {"similarity", eval.similarity},
        {"references", eval.references.string()},
        {"reference_clusters", eval.reference_clusters.string()},
        {"nli_threshold", eval.nli_threshold},
        {"parallelism", eval.parallelism},
        {"max_pairs", eval.max_pairs}}},
  };
}

void PipelineConfig::Validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(std::string(name) + " must be in [0, 1]");
    }
  };
  quantizer.Validate();
  unit(pairing.cand_threshold, "pairing.cand_threshold");
  unit(pairing.cand_upper, "pairing.cand_upper");
  unit(pairing.entail_threshold, "pairing.entail_threshold");
  unit(retrieval.drop_threshold, "retrieval.drop_threshold");
  unit(retrieval.merge_threshold, "retrieval.merge_threshold");
  unit(eval.nli_threshold, "eval.nli_threshold");
  unit(nli_min_overlap, "nli.min_overlap");
  if (retrieval.k < 1) throw Error("retrieval.k must be at least 1");
  if (retrieval.alpha < 0.0) throw Error("retrieval.alpha must be non-negative");
  if (generation.samples < 1) throw Error("generation.samples must be at least 1");
  if (generation.temperature < 0.0) {
    throw Error("generation.temperature must be non-negative");
  }
  ParseSummaryMode(generation.mode);
  if (eval.similarity != "tfidf" && eval.similarity != "nli") {
    throw Error("eval.similarity must be tfidf or nli");
  }
  if (eval.max_pairs < 1) throw Error("eval.max_pairs must be positive");
  if ((embeddings.mode == "mock" || embeddings.mode == "http") &&
      embeddings.dim != quantizer.dim) {
    throw Error("embeddings.dim must equal quantizer.dim");
  }
}

std::filesystem::path PipelineConfig::Resolve(
    const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path PipelineConfig::Output(std::string_view name) const {
  return Resolve(outputs_path) / std::string(name);
}

std::string ToString(Stage stage) {
  switch (stage) {
    case Stage::kIngest:
      return "ingest";
    case Stage::kMinePairs:
      return "mine-pairs";
    case Stage::kTrain:
      return "train";
    case Stage::kIndex:
      return "index";
    case Stage::kRetrieve:
      return "retrieve";
    case Stage::kSummarize:
      return "summarize";
    case Stage::kEvaluate:
      return "evaluate";
    case Stage::kReport:
      return "report";
  }
  return "";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : AllStages()) {
    if (ToString(s) == name) return s;
  }
  throw Error("unknown stage: " + std::string(name));
}

std::vector<Stage> AllStages() {
  std::vector<Stage> out;
  for (const StageSpec& spec : Graph()) out.push_back(spec.stage);
  return out;
}

void RunStage(Stage stage, const PipelineConfig& config) {
  Manifest manifest(config);
  manifest.RequireFresh(stage);
  json inputs = manifest.InputDigests(stage);
  std::vector<std::string> outputs;
  switch (stage) {
    case Stage::kIngest:
      outputs = RunIngest(config);
      break;
    case Stage::kMinePairs:
      outputs = RunMinePairs(config);
      break;
    case Stage::kTrain:
      outputs = RunTrain(config);
      break;
    case Stage::kIndex:
      outputs = RunIndex(config);
      break;
    case Stage::kRetrieve:
      outputs = RunRetrieve(config);
      break;
    case Stage::kSummarize:
      outputs = RunSummarize(config);
      break;
    case Stage::kEvaluate:
      outputs = RunEvaluate(config);
      break;
    case Stage::kReport:
      outputs = RunReport(config);
      break;
  }
  manifest.Record(stage, std::move(inputs), outputs);
}

void RunAll(const PipelineConfig& config) {
  for (Stage s : AllStages()) RunStage(s, config);
}

}  // namespace hiro
