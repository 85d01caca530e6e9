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

#ifndef HIRO_COMMON_H_
#define HIRO_COMMON_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hiro {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by remote clients (NLI, LLM, embeddings) when a request cannot be
// completed. Callers retry these; any other exception is fatal.
class TransportError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// Derives an independent seed for a named random stream so that stages
// (pairing, training, sampling, ...) never share generator state.
std::uint64_t SubstreamSeed(std::uint64_t seed, std::string_view name);

inline Rng MakeRng(std::uint64_t seed, std::string_view name) {
  return Rng(SubstreamSeed(seed, name));
}

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// Hex-encoded SHA-256 of a file's contents.
std::string FileDigest(const std::filesystem::path& path);
std::string Sha256Hex(std::string_view data);

}  // namespace hiro

#endif  // HIRO_COMMON_H_
