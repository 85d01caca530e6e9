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

#ifndef HIRO_SRC_JSON_FIELDS_H_
#define HIRO_SRC_JSON_FIELDS_H_

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hiro/common.h"

namespace hiro::internal {

inline void CheckKeys(const nlohmann::json& j, std::string_view section,
                      std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw Error(std::string(section) + " must be a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error("unknown config key " + std::string(section) + "." + key);
    }
  }
}

// Assigns `field` from j[key] when present. Returns whether it was present.
template <typename T>
bool ReadField(const nlohmann::json& j, const char* key, T& field) {
  auto it = j.find(key);
  if (it == j.end()) return false;
  try {
    field = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config key ") + key + ": " + e.what());
  }
  return true;
}

}  // namespace hiro::internal

#endif  // HIRO_SRC_JSON_FIELDS_H_
