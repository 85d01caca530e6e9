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

#ifndef HIRO_EMBEDDINGS_H_
#define HIRO_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "hiro/corpus.h"

namespace hiro {

// Dense sentence embeddings keyed by sentence id.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  bool Contains(const std::string& id) const { return rows_.count(id) != 0; }
  // Throws Error naming `id` when absent.
  std::span<const float> Get(const std::string& id) const;
  Eigen::VectorXd GetVector(const std::string& id) const;

  void Insert(const std::string& id, std::vector<float> values);

  // Manifest JSON {"version":1,"dim","count","data","ids"} next to a raw
  // little-endian float32 file holding the rows in `ids` order.
  void Save(const std::filesystem::path& manifest) const;
  static EmbeddingTable Load(const std::filesystem::path& manifest);

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::vector<float>> rows_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual std::vector<std::vector<float>> Embed(
      std::span<const std::string> texts) const = 0;
};

// Deterministic pseudo-embeddings: the unit-normalised sum of per-token
// Gaussian vectors, each seeded from a hash of the token and `seed`.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  MockEmbeddingProvider(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  int dim() const override { return dim_; }
  std::vector<std::vector<float>> Embed(
      std::span<const std::string> texts) const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// POST {"texts": [...]} -> {"embeddings": [[...], ...]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string api_key, int dim,
                        int max_retries = 3, int timeout_seconds = 120);
  int dim() const override { return dim_; }
  std::vector<std::vector<float>> Embed(
      std::span<const std::string> texts) const override;

 private:
  std::string endpoint_;
  std::string api_key_;
  int dim_;
  int max_retries_;
  int timeout_seconds_;
};

struct EmbeddingOptions {
  // "mock", "file" or "http".
  std::string mode = "mock";
  std::filesystem::path manifest;  // file mode
  std::string endpoint;            // http mode
  int dim = 768;
  int batch_size = 64;
  std::uint64_t seed = 0;          // mock mode
};

EmbeddingTable EmbedCorpus(const Corpus& corpus,
                           const EmbeddingProvider& provider,
                           int batch_size = 64);

// Loads (file mode) or computes (mock/http) embeddings for every corpus
// sentence. Missing rows in file mode are an error naming the sentence.
EmbeddingTable ResolveEmbeddings(const Corpus& corpus,
                                 const EmbeddingOptions& options);

}  // namespace hiro

#endif  // HIRO_EMBEDDINGS_H_
