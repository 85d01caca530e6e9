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

#ifndef HIRO_SERIALIZATION_H_
#define HIRO_SERIALIZATION_H_

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "hiro/pairing.h"
#include "hiro/quantizer.h"

namespace hiro {

// JSON bindings for configuration structs. Unknown keys are rejected by
// from_json so that typos in config files surface as errors.
void to_json(nlohmann::json& j, const QuantizerConfig& c);
void from_json(const nlohmann::json& j, QuantizerConfig& c);
void to_json(nlohmann::json& j, const PairingConfig& c);
void from_json(const nlohmann::json& j, PairingConfig& c);

nlohmann::json MatrixToJson(const Eigen::MatrixXd& m);
Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j);

}  // namespace hiro

#endif  // HIRO_SERIALIZATION_H_
