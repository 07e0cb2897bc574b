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

#include <span>
#include <vector>

#include "data/environment.hpp"
#include "model/modular_model.hpp"
#include "regularizers/regularizers.hpp"
#include "tensor/array.hpp"

namespace mtcrl {

// Pearson correlations between all module output dims on one batch.
struct CorrHeatmap {
  Array corr;  // d x d
  // First dim of each module block, in order.
  std::vector<std::size_t> block_starts;
  std::size_t module_dim = 0;

  std::size_t block_of(std::size_t dim) const { return dim / module_dim; }
  // Largest |corr| between dims of different modules; 0 for one module.
  double max_cross_block() const;
};

CorrHeatmap module_corr_heatmap(const ModularModel& model, const Array& x,
                                const PearsonOptions& options = {});

// per_env[e](t, i) = d R^e_t / d A_{t,i} evaluated at the current routing
// weights; difference = per_env[1] - per_env[0] (valid minus train).
struct TaskModuleGradients {
  std::vector<Array> per_env;
  Array difference;
};

TaskModuleGradients task_module_gradients(const ModularModel& model,
                                          std::span<const Environment> envs);

struct SimilarityGraph {
  Array similarity;  // T x T cosine similarity of routing rows
  Array adjacency;   // 1 where similarity >= threshold, off the diagonal
  double threshold = 0.1;
};

constexpr double kDefaultSimilarityThreshold = 0.1;

SimilarityGraph task_similarity(const Array& a, double threshold = kDefaultSimilarityThreshold);

}  // namespace mtcrl
