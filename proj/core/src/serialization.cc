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

#include "hiro/serialization.h"

#include <algorithm>
#include <initializer_list>
#include <string>

#include "json_fields.h"

namespace hiro {

using nlohmann::json;
using internal::CheckKeys;
using internal::ReadField;

void to_json(json& j, const QuantizerConfig& c) {
  j = json{{"K", c.K},
           {"D", c.D},
           {"dim", c.dim},
           {"omega", c.omega},
           {"lr", c.lr},
           {"batch_size", c.batch_size},
           {"tau0", c.tau0},
           {"tau_min", c.tau_min},
           {"gamma_temp", c.gamma_temp},
           {"beta_kl", c.beta_kl},
           {"beta_nl", c.beta_nl},
           {"gamma_nl", c.gamma_nl},
           {"alpha_init", c.alpha_init},
           {"depth_dropout_p", c.depth_dropout_p},
           {"neg_threshold", c.neg_threshold},
           {"steps", c.steps},
           {"train_projection", c.train_projection},
           {"estimator", c.estimator == GradientEstimator::kSoft
                             ? "soft"
                             : "straight_through"},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps}};
}

void from_json(const json& j, QuantizerConfig& c) {
  CheckKeys(j, "quantizer",
            {"K", "D", "dim", "omega", "lr", "batch_size", "tau0", "tau_min",
             "gamma_temp", "beta_kl", "beta_nl", "gamma_nl", "alpha_init",
             "depth_dropout_p", "neg_threshold", "steps", "train_projection",
             "estimator", "adam_beta1", "adam_beta2", "adam_eps"});
  ReadField(j, "K", c.K);
  ReadField(j, "D", c.D);
  ReadField(j, "dim", c.dim);
  ReadField(j, "omega", c.omega);
  ReadField(j, "lr", c.lr);
  ReadField(j, "batch_size", c.batch_size);
  ReadField(j, "tau0", c.tau0);
  ReadField(j, "tau_min", c.tau_min);
  ReadField(j, "gamma_temp", c.gamma_temp);
  ReadField(j, "beta_kl", c.beta_kl);
  ReadField(j, "beta_nl", c.beta_nl);
  ReadField(j, "gamma_nl", c.gamma_nl);
  ReadField(j, "alpha_init", c.alpha_init);
  ReadField(j, "depth_dropout_p", c.depth_dropout_p);
  ReadField(j, "neg_threshold", c.neg_threshold);
  ReadField(j, "steps", c.steps);
  ReadField(j, "train_projection", c.train_projection);
  std::string estimator;
  if (ReadField(j, "estimator", estimator)) {
    if (estimator == "soft") {
      c.estimator = GradientEstimator::kSoft;
    } else if (estimator == "straight_through") {
      c.estimator = GradientEstimator::kStraightThrough;
    } else {
      throw Error("quantizer.estimator must be soft or straight_through");
    }
  }
  ReadField(j, "adam_beta1", c.adam_beta1);
  ReadField(j, "adam_beta2", c.adam_beta2);
  ReadField(j, "adam_eps", c.adam_eps);
}

void to_json(json& j, const PairingConfig& c) {
  j = json{{"cand_threshold", c.cand_threshold},
           {"cand_upper", c.cand_upper},
           {"k_candidates", c.k_candidates},
           {"entail_threshold", c.entail_threshold},
           {"pair_budget", c.pair_budget},
           {"max_retries", c.max_retries},
           {"parallelism", c.parallelism}};
}

void from_json(const json& j, PairingConfig& c) {
  CheckKeys(j, "pairing",
            {"cand_threshold", "cand_upper", "k_candidates", "entail_threshold",
             "pair_budget", "max_retries", "parallelism"});
  ReadField(j, "cand_threshold", c.cand_threshold);
  ReadField(j, "cand_upper", c.cand_upper);
  ReadField(j, "k_candidates", c.k_candidates);
  ReadField(j, "entail_threshold", c.entail_threshold);
  ReadField(j, "pair_budget", c.pair_budget);
  ReadField(j, "max_retries", c.max_retries);
  ReadField(j, "parallelism", c.parallelism);
}

json MatrixToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  if (!j.is_array() || j.empty()) throw Error("matrix must be a non-empty array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error("matrix rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

}  // namespace hiro
