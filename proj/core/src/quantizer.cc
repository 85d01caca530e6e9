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

#include "hiro/quantizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hiro/serialization.h"

namespace hiro {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kModelVersion = 1;

// Row-wise softmax; also returns row-wise log-softmax.
void RowSoftmax(const MatrixXd& logits, MatrixXd* probs, MatrixXd* log_probs) {
  const Eigen::Index rows = logits.rows();
  probs->resize(logits.rows(), logits.cols());
  if (log_probs != nullptr) log_probs->resize(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < rows; ++n) {
    const double max = logits.row(n).maxCoeff();
    const double lse =
        max + std::log((logits.row(n).array() - max).exp().sum());
    probs->row(n) = (logits.row(n).array() - lse).exp();
    if (log_probs != nullptr) log_probs->row(n) = logits.row(n).array() - lse;
  }
}

Eigen::Index ArgMax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index q = 1; q < row.size(); ++q) {
    if (row[q] > row[best]) best = q;
  }
  return best;
}

double Gumbel(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double u = uniform(rng);
  while (u <= 0.0) u = uniform(rng);
  return -std::log(-std::log(u));
}

// Negative squared distances from `residual` to every row of `codebook`.
VectorXd NegSquaredDistances(const MatrixXd& codebook, const VectorXd& residual) {
  VectorXd scores(codebook.rows());
  for (Eigen::Index q = 0; q < codebook.rows(); ++q) {
    scores[q] = -(residual.transpose() - codebook.row(q)).squaredNorm();
  }
  return scores;
}

void CheckFinite(const MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) throw Error(what + " contains non-finite values");
}

}  // namespace

bool Path::IsPrefixOf(const Path& other) const {
  return codes_.size() <= other.codes_.size() &&
         std::equal(codes_.begin(), codes_.end(), other.codes_.begin());
}

std::string Path::ToString() const {
  std::string out;
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (i > 0) out += '.';
    out += std::to_string(codes_[i]);
  }
  return out;
}

void QuantizerConfig::Validate() const {
  if (K < 2) throw Error("quantizer.K must be >= 2");
  if (D < 1) throw Error("quantizer.D must be >= 1");
  if (dim < 1) throw Error("quantizer.dim must be >= 1");
  if (batch_size < 1) throw Error("quantizer.batch_size must be >= 1");
  if (!(tau_min > 0.0) || tau_min > tau0) {
    throw Error("quantizer temperatures must satisfy 0 < tau_min <= tau0");
  }
  if (!(gamma_temp > 0.0)) throw Error("quantizer.gamma_temp must be > 0");
  if (!(gamma_nl > 0.0)) throw Error("quantizer.gamma_nl must be > 0");
  if (omega < 0.0) throw Error("quantizer.omega must be >= 0");
  if (depth_dropout_p < 0.0 || depth_dropout_p > 1.0) {
    throw Error("quantizer.depth_dropout_p must be in [0, 1]");
  }
  if (neg_threshold < 0.0 || neg_threshold > 1.0) {
    throw Error("quantizer.neg_threshold must be in [0, 1]");
  }
  if (steps < 0) throw Error("quantizer.steps must be >= 0");
}

QuantizerModel QuantizerModel::Initialize(const QuantizerConfig& config,
                                          std::uint64_t seed) {
  config.Validate();
  QuantizerModel model;
  model.config = config;
  model.projection = MatrixXd::Identity(config.dim, config.dim);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double base = 1.0 / std::sqrt(static_cast<double>(config.dim));
  for (int d = 0; d < config.D; ++d) {
    const double stddev = std::pow(config.alpha_init, d) * base;
    MatrixXd codebook(config.K, config.dim);
    for (Eigen::Index q = 0; q < codebook.rows(); ++q) {
      for (Eigen::Index j = 0; j < codebook.cols(); ++j) {
        codebook(q, j) = stddev * normal(rng);
      }
    }
    model.codebooks.push_back(std::move(codebook));
  }
  return model;
}

void QuantizerModel::Validate() const {
  config.Validate();
  if (projection.rows() != config.dim || projection.cols() != config.dim) {
    throw Error("projection must be dim x dim");
  }
  CheckFinite(projection, "projection");
  if (static_cast<int>(codebooks.size()) != config.D) {
    throw Error("codebook count must equal D");
  }
  for (std::size_t d = 0; d < codebooks.size(); ++d) {
    if (codebooks[d].rows() != config.K || codebooks[d].cols() != config.dim) {
      throw Error("codebook " + std::to_string(d) + " must be K x dim");
    }
    CheckFinite(codebooks[d], "codebook " + std::to_string(d));
  }
}

std::string QuantizerModel::ToJson() const {
  nlohmann::json doc;
  doc["version"] = kModelVersion;
  doc["K"] = config.K;
  doc["D"] = config.D;
  doc["dim"] = config.dim;
  doc["config"] = config;
  doc["projection"] = MatrixToJson(projection);
  nlohmann::json& books = doc["codebooks"] = nlohmann::json::array();
  for (const MatrixXd& c : codebooks) books.push_back(MatrixToJson(c));
  return doc.dump() + "\n";
}

QuantizerModel QuantizerModel::FromJson(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("model file: ") + e.what());
  }
  if (doc.value("version", 0) != kModelVersion) {
    throw Error("model file: unsupported version");
  }
  QuantizerModel model;
  model.config = doc.at("config").get<QuantizerConfig>();
  if (doc.at("K").get<int>() != model.config.K ||
      doc.at("D").get<int>() != model.config.D ||
      doc.at("dim").get<int>() != model.config.dim) {
    throw Error("model file: header disagrees with config");
  }
  model.projection = MatrixFromJson(doc.at("projection"));
  for (const auto& c : doc.at("codebooks")) {
    model.codebooks.push_back(MatrixFromJson(c));
  }
  model.Validate();
  return model;
}

void QuantizerModel::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, ToJson());
}

QuantizerModel QuantizerModel::Load(const std::filesystem::path& path) {
  return FromJson(ReadFile(path));
}

double Temperature(const QuantizerConfig& config, long step) {
  return std::max(config.tau_min,
                  config.tau0 * std::exp(-static_cast<double>(step) /
                                         config.gamma_temp));
}

VectorXd Project(const QuantizerModel& model, const VectorXd& embedding) {
  if (embedding.size() != model.dim()) {
    throw Error("embedding has dimension " + std::to_string(embedding.size()) +
                ", model expects " + std::to_string(model.dim()));
  }
  return model.projection * embedding;
}

VectorXd LevelScores(const QuantizerModel& model, const VectorXd& embedding,
                     const Path& prefix) {
  if (prefix.depth() >= static_cast<std::size_t>(model.D())) {
    throw Error("prefix already has full depth");
  }
  VectorXd residual = Project(model, embedding);
  for (std::size_t d = 0; d < prefix.depth(); ++d) {
    residual -= model.codebooks[d].row(prefix[d]).transpose();
  }
  return NegSquaredDistances(model.codebooks[prefix.depth()], residual);
}

Path Encode(const QuantizerModel& model, const VectorXd& embedding) {
  VectorXd residual = Project(model, embedding);
  std::vector<int> codes;
  codes.reserve(static_cast<std::size_t>(model.D()));
  for (int d = 0; d < model.D(); ++d) {
    const MatrixXd& codebook = model.codebooks[static_cast<std::size_t>(d)];
    const VectorXd scores = NegSquaredDistances(codebook, residual);
    const Eigen::Index best = ArgMax(scores.transpose());
    codes.push_back(static_cast<int>(best));
    residual -= codebook.row(best).transpose();
  }
  return Path(std::move(codes));
}

SampledPath SamplePath(const QuantizerModel& model, const VectorXd& embedding,
                       double tau, Rng& rng) {
  if (!(tau > 0.0)) throw Error("temperature must be > 0");
  SampledPath out;
  VectorXd residual = Project(model, embedding);
  for (int d = 0; d < model.D(); ++d) {
    const MatrixXd& codebook = model.codebooks[static_cast<std::size_t>(d)];
    const Eigen::RowVectorXd logits =
        NegSquaredDistances(codebook, residual).transpose() / tau;
    MatrixXd probs;
    RowSoftmax(logits, &probs, nullptr);
    Eigen::RowVectorXd perturbed = logits;
    for (Eigen::Index q = 0; q < perturbed.size(); ++q) perturbed[q] += Gumbel(rng);
    const Eigen::Index pick = ArgMax(perturbed);
    out.path.push_back(static_cast<int>(pick));
    out.probabilities.push_back(probs.row(0).transpose());
    residual -= codebook.row(pick).transpose();
  }
  return out;
}

VectorXd PathEmbedding(const QuantizerModel& model, const Path& prefix) {
  if (prefix.depth() > static_cast<std::size_t>(model.D())) {
    throw Error("path deeper than model");
  }
  VectorXd sum = VectorXd::Zero(model.dim());
  for (std::size_t d = 0; d < prefix.depth(); ++d) {
    sum += model.codebooks[d].row(prefix[d]).transpose();
  }
  return sum;
}

double SubpathSimilarity(const QuantizerModel& model, const Path& a,
                         const Path& b) {
  const auto D = static_cast<std::size_t>(model.D());
  if (a.depth() != D || b.depth() != D) {
    throw Error("subpath similarity needs full-depth paths");
  }
  VectorXd ca = VectorXd::Zero(model.dim());
  VectorXd cb = VectorXd::Zero(model.dim());
  double total = 0.0;
  for (std::size_t d = 0; d < D; ++d) {
    ca += model.codebooks[d].row(a[d]).transpose();
    cb += model.codebooks[d].row(b[d]).transpose();
    total += std::max(ca.dot(cb), 0.0);
  }
  return total / static_cast<double>(D);
}

LossNoise NeutralNoise(const QuantizerConfig& config, std::size_t pairs) {
  LossNoise noise;
  noise.gumbel.assign(2 * pairs, MatrixXd::Zero(config.D, config.K));
  noise.depth.assign(pairs, config.D);
  return noise;
}

LossNoise DrawLossNoise(const QuantizerConfig& config, std::size_t pairs,
                        Rng& rng) {
  LossNoise noise;
  noise.gumbel.reserve(2 * pairs);
  for (std::size_t n = 0; n < 2 * pairs; ++n) {
    MatrixXd g(config.D, config.K);
    for (Eigen::Index d = 0; d < g.rows(); ++d) {
      for (Eigen::Index q = 0; q < g.cols(); ++q) g(d, q) = Gumbel(rng);
    }
    noise.gumbel.push_back(std::move(g));
  }
  std::bernoulli_distribution drop(config.depth_dropout_p);
  std::uniform_int_distribution<int> depth(1, config.D);
  noise.depth.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    noise.depth.push_back(drop(rng) ? depth(rng) : config.D);
  }
  return noise;
}

LossResult ContrastiveLoss(const QuantizerModel& model,
                           std::span<const ContrastiveExample> batch,
                           const BoolMatrix& negatives, double tau,
                           const LossNoise& noise) {
  const QuantizerConfig& cfg = model.config;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index N = 2 * B;
  const int D = cfg.D;
  const int K = cfg.K;
  if (B == 0) throw Error("empty batch");
  if (negatives.size() != static_cast<std::size_t>(N)) {
    throw Error("negative mask must be 2B x 2B");
  }
  if (noise.gumbel.size() != static_cast<std::size_t>(N) ||
      noise.depth.size() != batch.size()) {
    throw Error("loss noise does not match batch size");
  }
  if (!(tau > 0.0)) throw Error("temperature must be > 0");
  const bool hard = cfg.estimator == GradientEstimator::kStraightThrough;

  // Raw inputs, queries then positives.
  MatrixXd inputs(N, cfg.dim);
  for (Eigen::Index i = 0; i < B; ++i) {
    inputs.row(i) = batch[static_cast<std::size_t>(i)].query.transpose();
    inputs.row(B + i) = batch[static_cast<std::size_t>(i)].positive.transpose();
  }

  // Forward through the residual levels.
  std::vector<MatrixXd> residuals(static_cast<std::size_t>(D));
  std::vector<MatrixXd> relaxed(static_cast<std::size_t>(D));  // softmax(l + g)
  std::vector<MatrixXd> weights(static_cast<std::size_t>(D));  // forward code weights
  std::vector<MatrixXd> probs(static_cast<std::size_t>(D));    // softmax(l)
  std::vector<MatrixXd> log_probs(static_cast<std::size_t>(D));
  std::vector<MatrixXd> cumulative(static_cast<std::size_t>(D));

  MatrixXd residual = inputs * model.projection.transpose();
  MatrixXd cum = MatrixXd::Zero(N, cfg.dim);
  for (int d = 0; d < D; ++d) {
    const auto ud = static_cast<std::size_t>(d);
    const MatrixXd& codebook = model.codebooks[ud];
    MatrixXd logits(N, K);
    for (Eigen::Index n = 0; n < N; ++n) {
      for (Eigen::Index q = 0; q < K; ++q) {
        logits(n, q) =
            -(residual.row(n) - codebook.row(q)).squaredNorm() / tau;
      }
    }
    RowSoftmax(logits, &probs[ud], &log_probs[ud]);
    MatrixXd perturbed = logits;
    for (Eigen::Index n = 0; n < N; ++n) {
      perturbed.row(n) += noise.gumbel[static_cast<std::size_t>(n)].row(d);
    }
    RowSoftmax(perturbed, &relaxed[ud], nullptr);
    if (hard) {
      weights[ud] = MatrixXd::Zero(N, K);
      for (Eigen::Index n = 0; n < N; ++n) {
        weights[ud](n, ArgMax(perturbed.row(n))) = 1.0;
      }
    } else {
      weights[ud] = relaxed[ud];
    }
    residuals[ud] = residual;
    const MatrixXd selected = weights[ud] * codebook;
    residual -= selected;
    cum += selected;
    cumulative[ud] = cum;
  }

  // Similarities between each query and every batch sentence, per level.
  std::vector<MatrixXd> dots(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    const auto ud = static_cast<std::size_t>(d);
    dots[ud] = cumulative[ud].topRows(B) * cumulative[ud].transpose();
  }

  LossResult result;
  std::vector<MatrixXd> sim_grad(static_cast<std::size_t>(D),
                                 MatrixXd::Zero(B, N));
  const double inv_b = 1.0 / static_cast<double>(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const int depth = noise.depth[static_cast<std::size_t>(i)];
    if (depth < 1 || depth > D) throw Error("truncation depth out of range");
    auto sim = [&](Eigen::Index m) {
      double s = 0.0;
      for (int d = 0; d < depth; ++d) {
        s += std::max(dots[static_cast<std::size_t>(d)](i, m), 0.0);
      }
      return s / depth;
    };
    std::vector<Eigen::Index> negs;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (j != i && j != B + i &&
          negatives(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        negs.push_back(j);
      }
    }
    if (negs.empty()) continue;  // f = 1, no loss

    const double rho = batch[static_cast<std::size_t>(i)].rho;
    const double log_w = std::log(cfg.omega / static_cast<double>(negs.size()));
    const double s_pos = sim(B + i);
    std::vector<double> s_neg(negs.size());
    double max = s_pos;
    for (std::size_t k = 0; k < negs.size(); ++k) {
      s_neg[k] = sim(negs[k]) + log_w;
      max = std::max(max, s_neg[k]);
    }
    double z = std::exp(s_pos - max);
    for (double s : s_neg) z += std::exp(s - max);
    const double lse = max + std::log(z);
    result.infonce += rho * (lse - s_pos) * inv_b;

    // d/ds of rho * (lse - s_pos), spread over the contributing levels.
    auto spread = [&](Eigen::Index m, double coef) {
      for (int d = 0; d < depth; ++d) {
        const auto ud = static_cast<std::size_t>(d);
        if (dots[ud](i, m) > 0.0) sim_grad[ud](i, m) += coef / depth;
      }
    };
    spread(B + i, rho * (std::exp(s_pos - lse) - 1.0) * inv_b);
    for (std::size_t k = 0; k < negs.size(); ++k) {
      spread(negs[k], rho * std::exp(s_neg[k] - lse) * inv_b);
    }
  }

  // Entropy regulariser: beta_kl * (-mean_{n,d} H(p_{n,d})).
  const double ent_scale = cfg.beta_kl / static_cast<double>(N * D);
  std::vector<VectorXd> entropies(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    const auto ud = static_cast<std::size_t>(d);
    entropies[ud] =
        -(probs[ud].array() * log_probs[ud].array()).rowwise().sum().matrix();
    result.entropy -= ent_scale * entropies[ud].sum();
  }

  // Norm loss on mean codebook row norms of consecutive levels.
  Gradients& grad = result.gradients;
  grad.codebooks.assign(static_cast<std::size_t>(D), MatrixXd::Zero(K, cfg.dim));
  {
    std::vector<double> mean_norm(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
      mean_norm[static_cast<std::size_t>(d)] =
          model.codebooks[static_cast<std::size_t>(d)].rowwise().norm().mean();
    }
    std::vector<double> dmean(static_cast<std::size_t>(D), 0.0);
    for (int d = 0; d + 1 < D; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      const double gap = mean_norm[ud + 1] - mean_norm[ud] / cfg.gamma_nl;
      result.norm += cfg.beta_nl * gap * gap;
      dmean[ud + 1] += 2.0 * cfg.beta_nl * gap;
      dmean[ud] -= 2.0 * cfg.beta_nl * gap / cfg.gamma_nl;
    }
    for (int d = 0; d < D; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      const MatrixXd& codebook = model.codebooks[ud];
      for (Eigen::Index q = 0; q < K; ++q) {
        const double n = codebook.row(q).norm();
        if (n > 0.0) {
          grad.codebooks[ud].row(q) += dmean[ud] / K * codebook.row(q) / n;
        }
      }
    }
  }
  result.total = result.infonce + result.entropy + result.norm;

  // Backward through the levels.
  MatrixXd grad_cum_suffix = MatrixXd::Zero(N, cfg.dim);
  MatrixXd grad_next_residual = MatrixXd::Zero(N, cfg.dim);
  for (int d = D - 1; d >= 0; --d) {
    const auto ud = static_cast<std::size_t>(d);
    const MatrixXd& codebook = model.codebooks[ud];
    const MatrixXd& cumd = cumulative[ud];
    grad_cum_suffix.topRows(B) += sim_grad[ud] * cumd;
    grad_cum_suffix += sim_grad[ud].transpose() * cumd.topRows(B);

    const MatrixXd grad_selected = grad_cum_suffix - grad_next_residual;
    grad.codebooks[ud] += weights[ud].transpose() * grad_selected;

    const MatrixXd grad_w = grad_selected * codebook.transpose();
    const MatrixXd& y = relaxed[ud];
    const VectorXd inner = (y.array() * grad_w.array()).rowwise().sum();
    MatrixXd grad_logits =
        (y.array() * (grad_w.colwise() - inner).array()).matrix();
    const MatrixXd& p = probs[ud];
    grad_logits += ent_scale *
                   (p.array() * (log_probs[ud].colwise() + entropies[ud]).array())
                       .matrix();

    const MatrixXd grad_scores = grad_logits / tau;
    const MatrixXd& r = residuals[ud];
    const VectorXd row_sum = grad_scores.rowwise().sum();
    const Eigen::RowVectorXd col_sum = grad_scores.colwise().sum();
    grad_next_residual += -2.0 * (r.array().colwise() * row_sum.array()).matrix() +
                          2.0 * grad_scores * codebook;
    grad.codebooks[ud] += 2.0 * grad_scores.transpose() * r -
                          2.0 * (codebook.array().colwise() *
                                 col_sum.transpose().array())
                                    .matrix();
  }
  grad.projection = grad_next_residual.transpose() * inputs;
  return result;
}

TrainResult Train(QuantizerModel model, std::span<const PositivePair> pairs,
                  const EmbeddingTable& embeddings,
                  const LexicalSimilarity& similarity, std::uint64_t seed) {
  model.Validate();
  const QuantizerConfig& cfg = model.config;
  TrainResult result;

  std::unordered_map<std::string, VectorXd> vectors;
  for (const PositivePair& p : pairs) {
    for (const std::string* id : {&p.query_id, &p.target_id}) {
      if (vectors.count(*id) == 0) {
        if (!embeddings.Contains(*id)) {
          throw Error("missing embedding for sentence " + *id);
        }
        vectors.emplace(*id, embeddings.GetVector(*id));
        if (vectors.at(*id).size() != cfg.dim) {
          throw Error("embedding for " + *id + " does not match model dim");
        }
      }
    }
  }
  if (cfg.steps == 0) {
    result.model = std::move(model);
    return result;
  }
  if (pairs.empty()) throw Error("training needs at least one positive pair");

  Rng rng(seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  const auto D = static_cast<std::size_t>(cfg.D);
  MatrixXd m_proj = MatrixXd::Zero(cfg.dim, cfg.dim);
  MatrixXd v_proj = m_proj;
  std::vector<MatrixXd> m_cb(D, MatrixXd::Zero(cfg.K, cfg.dim));
  std::vector<MatrixXd> v_cb = m_cb;

  auto adam = [&](MatrixXd& param, MatrixXd& m, MatrixXd& v,
                  const MatrixXd& g, long t) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
    param.array() -= cfg.lr * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + cfg.adam_eps);
  };

  const auto batch_size = std::min(static_cast<std::size_t>(cfg.batch_size),
                                   pairs.size());
  for (long step = 0; step < cfg.steps; ++step) {
    std::vector<const PositivePair*> members;
    members.reserve(batch_size);
    while (members.size() < batch_size) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      members.push_back(&pairs[order[cursor++]]);
    }
    const std::size_t b = members.size();
    std::vector<ContrastiveExample> batch;
    batch.reserve(b);
    std::vector<const std::string*> ids(2 * b);
    for (std::size_t i = 0; i < b; ++i) {
      const PositivePair& p = *members[i];
      batch.push_back({vectors.at(p.query_id), vectors.at(p.target_id), p.rho});
      ids[i] = &p.query_id;
      ids[b + i] = &p.target_id;
    }
    const BoolMatrix mask = NegativeMask(
        2 * b,
        [&](std::size_t i, std::size_t j) {
          return *ids[i] == *ids[j] ? 1.0 : similarity(*ids[i], *ids[j]);
        },
        cfg.neg_threshold);

    const double tau = Temperature(cfg, step);
    const LossNoise noise = DrawLossNoise(cfg, b, rng);
    const LossResult loss = ContrastiveLoss(model, batch, mask, tau, noise);
    if (!std::isfinite(loss.total)) {
      throw Error("training diverged at step " + std::to_string(step));
    }

    const long t = step + 1;
    if (cfg.train_projection) {
      adam(model.projection, m_proj, v_proj, loss.gradients.projection, t);
    }
    for (std::size_t d = 0; d < D; ++d) {
      adam(model.codebooks[d], m_cb[d], v_cb[d], loss.gradients.codebooks[d], t);
    }
    result.log.push_back(
        {step, tau, loss.total, loss.infonce, loss.entropy, loss.norm});
  }
  result.model = std::move(model);
  return result;
}

std::string TrainLogToJsonl(std::span<const TrainLogEntry> log) {
  std::string out;
  for (const TrainLogEntry& e : log) {
    nlohmann::json line = {{"step", e.step},       {"tau", e.tau},
                           {"loss", e.loss},       {"infonce", e.infonce},
                           {"entropy", e.entropy}, {"norm", e.norm}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

namespace {

// Lloyd's algorithm with k-means++ seeding. Empty clusters keep their
// previous centroid.
MatrixXd KMeans(const MatrixXd& points, int k, Rng& rng, int iterations) {
  const Eigen::Index n = points.rows();
  MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    nearest[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick = 0;
    const double total = nearest.sum();
    if (total > 0.0) {
      std::uniform_real_distribution<double> uniform(0.0, total);
      double target = uniform(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= nearest[pick];
        if (target <= 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] =
          std::min(nearest[i], (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
    if (!changed) break;
  }
  return centroids;
}

}  // namespace

QuantizerModel FitResidualKMeans(std::span<const VectorXd> points, int K, int D,
                                 std::uint64_t seed, int iterations) {
  if (points.empty()) throw Error("k-means needs at least one point");
  QuantizerModel model;
  model.config.K = K;
  model.config.D = D;
  model.config.dim = static_cast<int>(points.front().size());
  model.config.Validate();
  model.projection = MatrixXd::Identity(model.config.dim, model.config.dim);

  MatrixXd residuals(static_cast<Eigen::Index>(points.size()), model.config.dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    residuals.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  Rng rng(seed);
  for (int d = 0; d < D; ++d) {
    MatrixXd centroids = KMeans(residuals, K, rng, iterations);
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
      const VectorXd r = residuals.row(i).transpose();
      const Eigen::Index best =
          ArgMax(NegSquaredDistances(centroids, r).transpose());
      residuals.row(i) -= centroids.row(best);
    }
    model.codebooks.push_back(std::move(centroids));
  }
  return model;
}

}  // namespace hiro
