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

#ifndef HIRO_QUANTIZER_H_
#define HIRO_QUANTIZER_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hiro/common.h"
#include "hiro/embeddings.h"
#include "hiro/pairing.h"

namespace hiro {

// Sequence of codes q_1..q_d, each in [0, K). A full path has d == D; shorter
// paths are subpaths (prefixes).
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<int> codes) : codes_(std::move(codes)) {}
  Path(std::initializer_list<int> codes) : codes_(codes) {}

  std::size_t depth() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  int operator[](std::size_t i) const { return codes_[i]; }
  const std::vector<int>& codes() const { return codes_; }

  Path Prefix(std::size_t depth) const {
    return Path(std::vector<int>(codes_.begin(),
                                 codes_.begin() + static_cast<long>(depth)));
  }
  bool IsPrefixOf(const Path& other) const;
  void push_back(int code) { codes_.push_back(code); }

  std::string ToString() const;  // e.g. "3.0.11"

  friend auto operator<=>(const Path&, const Path&) = default;
  friend bool operator==(const Path&, const Path&) = default;

 private:
  std::vector<int> codes_;
};

enum class GradientEstimator {
  // Hard Gumbel-max sample forward, softmax Jacobian backward.
  kStraightThrough,
  // Relaxed Gumbel-softmax sample forward and backward.
  kSoft,
};

struct QuantizerConfig {
  int K = 12;
  int D = 12;
  int dim = 768;
  double omega = 150.0;
  double lr = 1e-4;
  int batch_size = 384;
  double tau0 = 1.0;
  double tau_min = 0.5;
  double gamma_temp = 33333.0;
  double beta_kl = 0.0025;
  double beta_nl = 0.05;
  double gamma_nl = 1.5;
  double alpha_init = 0.5;
  double depth_dropout_p = 0.3;
  double neg_threshold = 0.3;
  int steps = 0;
  bool train_projection = true;
  GradientEstimator estimator = GradientEstimator::kStraightThrough;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void Validate() const;
};

// Linear projection followed by D residual codebooks, each K x dim.
struct QuantizerModel {
  QuantizerConfig config;
  Eigen::MatrixXd projection;
  std::vector<Eigen::MatrixXd> codebooks;

  // Identity projection; level d (0-based) rows drawn i.i.d. from
  // N(0, (alpha_init^d / sqrt(dim))^2).
  static QuantizerModel Initialize(const QuantizerConfig& config,
                                   std::uint64_t seed);

  int K() const { return config.K; }
  int D() const { return config.D; }
  int dim() const { return config.dim; }

  void Validate() const;

  std::string ToJson() const;
  static QuantizerModel FromJson(std::string_view json);
  void Save(const std::filesystem::path& path) const;
  static QuantizerModel Load(const std::filesystem::path& path);
};

// tau(step) = max(tau_min, tau0 * exp(-step / gamma_temp)).
double Temperature(const QuantizerConfig& config, long step);

Eigen::VectorXd Project(const QuantizerModel& model,
                        const Eigen::VectorXd& embedding);

// s_d(q) = -|| (z - sum_{d' < d} C_d'(prefix_d')) - C_d(q) ||^2 for the level
// following `prefix`, where z is the projected embedding.
Eigen::VectorXd LevelScores(const QuantizerModel& model,
                            const Eigen::VectorXd& embedding,
                            const Path& prefix);

// Greedy per-level argmax; ties go to the smallest code.
Path Encode(const QuantizerModel& model, const Eigen::VectorXd& embedding);

struct SampledPath {
  Path path;
  // softmax(s_d / tau) at each level, along the sampled path.
  std::vector<Eigen::VectorXd> probabilities;
};

// Gumbel-max sample of each level's code from softmax(s_d / tau).
SampledPath SamplePath(const QuantizerModel& model,
                       const Eigen::VectorXd& embedding, double tau, Rng& rng);

// C(q_1:d) = sum of the selected codebook rows.
Eigen::VectorXd PathEmbedding(const QuantizerModel& model, const Path& prefix);

// (1/D) sum_d max(C(a_1:d) . C(b_1:d), 0) over full paths.
double SubpathSimilarity(const QuantizerModel& model, const Path& a,
                         const Path& b);

struct ContrastiveExample {
  Eigen::VectorXd query;
  Eigen::VectorXd positive;
  double rho = 1.0;
};

// Random draws consumed by one loss evaluation. Fixing them makes the loss a
// deterministic function of the parameters.
struct LossNoise {
  // One D x K matrix of Gumbel(0, 1) draws per batch sentence; queries first,
  // then positives.
  std::vector<Eigen::MatrixXd> gumbel;
  // Number of levels used for each pair's similarities (1..D).
  std::vector<int> depth;
};

// Zero Gumbel noise and no depth truncation.
LossNoise NeutralNoise(const QuantizerConfig& config, std::size_t pairs);
LossNoise DrawLossNoise(const QuantizerConfig& config, std::size_t pairs,
                        Rng& rng);

struct Gradients {
  Eigen::MatrixXd projection;
  std::vector<Eigen::MatrixXd> codebooks;
};

struct LossResult {
  double total = 0.0;
  double infonce = 0.0;  // mean over pairs of -rho * log f
  double entropy = 0.0;  // beta_kl * (negative mean per-level entropy)
  double norm = 0.0;     // beta_nl * norm loss
  Gradients gradients;
};

// Weighted InfoNCE over a batch of pairs plus the entropy and norm
// regularisers. `negatives` indexes the 2B batch sentences (queries then
// positives); pair i's negatives are the sentences j != i, B + i with
// negatives(i, j) set.
LossResult ContrastiveLoss(const QuantizerModel& model,
                           std::span<const ContrastiveExample> batch,
                           const BoolMatrix& negatives, double tau,
                           const LossNoise& noise);

struct TrainLogEntry {
  long step = 0;
  double tau = 0.0;
  double loss = 0.0;
  double infonce = 0.0;
  double entropy = 0.0;
  double norm = 0.0;
};

struct TrainResult {
  QuantizerModel model;
  std::vector<TrainLogEntry> log;
};

// Lexical similarity between two sentences, used to build in-batch negative
// masks.
using LexicalSimilarity =
    std::function<double(const std::string&, const std::string&)>;

// Mini-batch Adam over `pairs` for model.config.steps steps. Deterministic
// for a given seed.
TrainResult Train(QuantizerModel model, std::span<const PositivePair> pairs,
                  const EmbeddingTable& embeddings,
                  const LexicalSimilarity& similarity, std::uint64_t seed);

std::string TrainLogToJsonl(std::span<const TrainLogEntry> log);

// Residual k-means baseline: Lloyd's algorithm on the embeddings, then on the
// residuals, D times. Returned as a model with identity projection so it can
// be used with Encode.
QuantizerModel FitResidualKMeans(std::span<const Eigen::VectorXd> points,
                                 int K, int D, std::uint64_t seed,
                                 int iterations = 50);

}  // namespace hiro

#endif  // HIRO_QUANTIZER_H_
