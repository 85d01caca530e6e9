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

#ifndef HIRO_SRC_PARALLEL_H_
#define HIRO_SRC_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace hiro::internal {

// Runs fn(i) for i in [0, n) on up to `workers` threads, strided so results
// written by index stay deterministic. The first exception is rethrown after
// all workers finish.
template <typename Fn>
void ParallelFor(std::size_t n, int workers, Fn&& fn) {
  const std::size_t w = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += w) fn(i);
    }));
  }
  for (auto& job : jobs) job.wait();
  for (auto& job : jobs) job.get();
}

}  // namespace hiro::internal

#endif  // HIRO_SRC_PARALLEL_H_
