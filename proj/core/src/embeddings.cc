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

#include "hiro/embeddings.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "http_json.h"

namespace hiro {
namespace {

constexpr int kManifestVersion = 1;

std::uint32_t ToLittleEndian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) |
           (v >> 24);
  }
  return v;
}

}  // namespace

std::span<const float> EmbeddingTable::Get(const std::string& id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw Error("missing embedding for sentence " + id);
  return it->second;
}

Eigen::VectorXd EmbeddingTable::GetVector(const std::string& id) const {
  auto row = Get(id);
  Eigen::VectorXd v(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) v[i] = row[i];
  return v;
}

void EmbeddingTable::Insert(const std::string& id, std::vector<float> values) {
  if (dim_ == 0) dim_ = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim_) {
    throw Error("embedding for " + id + " has dimension " +
                std::to_string(values.size()) + ", expected " +
                std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw Error("non-finite embedding for " + id);
  }
  auto [it, inserted] = rows_.insert_or_assign(id, std::move(values));
  if (inserted) ids_.push_back(id);
}

void EmbeddingTable::Save(const std::filesystem::path& manifest) const {
  std::filesystem::path data = manifest;
  data.replace_extension(".bin");

  std::string bytes;
  bytes.reserve(ids_.size() * static_cast<std::size_t>(dim_) * 4);
  for (const std::string& id : ids_) {
    for (float v : rows_.at(id)) {
      const std::uint32_t le = ToLittleEndian(std::bit_cast<std::uint32_t>(v));
      char buf[4];
      std::memcpy(buf, &le, 4);
      bytes.append(buf, 4);
    }
  }
  WriteFileAtomic(data, bytes);

  nlohmann::json doc = {{"version", kManifestVersion},
                        {"dim", dim_},
                        {"count", ids_.size()},
                        {"data", data.filename().string()},
                        {"ids", ids_}};
  WriteFileAtomic(manifest, doc.dump(1) + "\n");
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path& manifest) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ReadFile(manifest));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("embedding manifest " + manifest.string() + ": " + e.what());
  }
  if (doc.value("version", 0) != kManifestVersion) {
    throw Error("embedding manifest: unsupported version");
  }
  const int dim = doc.at("dim").get<int>();
  const auto ids = doc.at("ids").get<std::vector<std::string>>();
  const std::filesystem::path data =
      manifest.parent_path() / doc.at("data").get<std::string>();
  const std::string bytes = ReadFile(data);
  const std::size_t expected = ids.size() * static_cast<std::size_t>(dim) * 4;
  if (bytes.size() != expected) {
    throw Error("embedding data " + data.string() + " has " +
                std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(expected));
  }
  EmbeddingTable table(dim);
  std::size_t offset = 0;
  for (const std::string& id : ids) {
    std::vector<float> row(static_cast<std::size_t>(dim));
    for (float& v : row) {
      std::uint32_t le;
      std::memcpy(&le, bytes.data() + offset, 4);
      offset += 4;
      v = std::bit_cast<float>(ToLittleEndian(le));
    }
    table.Insert(id, std::move(row));
  }
  return table;
}

std::vector<std::vector<float>> MockEmbeddingProvider::Embed(
    std::span<const std::string> texts) const {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  std::vector<double> acc(static_cast<std::size_t>(dim_));
  for (const std::string& text : texts) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const std::string& token : Tokenize(text)) {
      Rng rng(SubstreamSeed(seed_, token));
      std::normal_distribution<double> normal;
      for (double& a : acc) a += normal(rng);
    }
    double norm = 0.0;
    for (double a : acc) norm += a * a;
    norm = std::sqrt(norm);
    std::vector<float> row(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
      row[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
    }
    out.push_back(std::move(row));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint,
                                             std::string api_key, int dim,
                                             int max_retries,
                                             int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      dim_(dim),
      max_retries_(max_retries),
      timeout_seconds_(timeout_seconds) {}

std::vector<std::vector<float>> HttpEmbeddingProvider::Embed(
    std::span<const std::string> texts) const {
  const nlohmann::json body = {
      {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  for (int attempt = 0;; ++attempt) {
    try {
      const auto res =
          internal::PostJson({endpoint_, api_key_, timeout_seconds_}, body);
      auto rows = res.at("embeddings").get<std::vector<std::vector<float>>>();
      if (rows.size() != texts.size()) {
        throw TransportError("embedding service returned " +
                             std::to_string(rows.size()) + " rows for " +
                             std::to_string(texts.size()) + " texts");
      }
      return rows;
    } catch (const nlohmann::json::exception& e) {
      if (attempt >= max_retries_) {
        throw TransportError(std::string("embedding response: ") + e.what());
      }
    } catch (const TransportError&) {
      if (attempt >= max_retries_) throw;
    }
  }
}

EmbeddingTable EmbedCorpus(const Corpus& corpus,
                           const EmbeddingProvider& provider, int batch_size) {
  EmbeddingTable table(provider.dim());
  const auto& sentences = corpus.sentences();
  const std::size_t step = static_cast<std::size_t>(std::max(batch_size, 1));
  for (std::size_t begin = 0; begin < sentences.size(); begin += step) {
    const std::size_t end = std::min(sentences.size(), begin + step);
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) texts.push_back(sentences[i].text);
    auto rows = provider.Embed(texts);
    for (std::size_t i = begin; i < end; ++i) {
      table.Insert(sentences[i].id, std::move(rows[i - begin]));
    }
  }
  return table;
}

EmbeddingTable ResolveEmbeddings(const Corpus& corpus,
                                 const EmbeddingOptions& options) {
  if (options.mode == "mock") {
    return EmbedCorpus(corpus, MockEmbeddingProvider(options.dim, options.seed),
                       options.batch_size);
  }
  if (options.mode == "http") {
    if (options.endpoint.empty()) throw Error("embeddings.endpoint is required");
    return EmbedCorpus(
        corpus,
        HttpEmbeddingProvider(options.endpoint,
                              internal::EnvOrEmpty("HIRO_EMBED_API_KEY"),
                              options.dim),
        options.batch_size);
  }
  if (options.mode == "file") {
    EmbeddingTable table = EmbeddingTable::Load(options.manifest);
    for (const Sentence& s : corpus.sentences()) table.Get(s.id);
    return table;
  }
  throw Error("unknown embeddings mode: " + options.mode);
}

}  // namespace hiro
