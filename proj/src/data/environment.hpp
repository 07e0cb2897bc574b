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
#include <string>
#include <vector>

#include "model/task_loss.hpp"
#include "tensor/array.hpp"

namespace mtcrl {

// Inputs, per-task labels and per-task causal masks for one data slice.
struct Dataset {
  std::string name;
  // n x D inputs.
  Array x;
  std::vector<TaskTargets> targets;
  // causal_masks[t][j] marks input dim j as causal for task t.
  std::vector<std::vector<bool>> causal_masks;

  std::size_t rows() const { return x.rank() == 2 ? x.rows() : 0; }
  std::size_t dim() const { return x.rank() == 2 ? x.cols() : 0; }
  std::size_t tasks() const { return targets.size(); }

  Dataset subset(std::span<const std::size_t> idx) const;
  Dataset first_rows(std::size_t n) const;
  // Keeps only the listed tasks, in order.
  Dataset select_tasks(std::span<const std::size_t> tasks) const;
  // Throws DataError unless shapes, labels and masks agree.
  void validate() const;
};

struct SplitData {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// An environment is a tagged slice; env 0 carries the task risk.
struct Environment {
  std::size_t id = 0;
  std::string name;
  const Dataset* data = nullptr;
};

// Tags train and valid (or any further slices) as environments 0, 1, ...
std::vector<Environment> split_environments(const Dataset& train, const Dataset& valid);
std::vector<Environment> split_environments(std::span<const Dataset> slices);

// Empirical P(Y_a = Y_b) for two +-1 tasks.
double label_agreement(const Dataset& data, std::size_t task_a, std::size_t task_b);

}  // namespace mtcrl
