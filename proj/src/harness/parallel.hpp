// Copyright 2026 The MT-CRL Authors.
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

#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace mtcrl {

// Worker count from MTCRL_WORKERS, defaulting to 1. Invalid values raise
// ConfigError.
std::size_t worker_count();

// Runs job(i) for i in [0, n) on up to `workers` threads. Results land at
// their index, so the output does not depend on scheduling. The first
// failure by index is rethrown after all jobs finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job);

template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, F f) {
  std::vector<T> out(n);
  parallel_for(n, workers, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace mtcrl
