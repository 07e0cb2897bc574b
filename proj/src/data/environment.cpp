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

#include "data/environment.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace mtcrl {

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.name = name;
  std::size_t d = dim();
  Array x_out(Shape{idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= rows()) throw DataError("subset index out of range");
    std::copy_n(x.values().data() + idx[r] * d, d, x_out.values().data() + r * d);
  }
  out.x = std::move(x_out);
  for (const auto& t : targets) out.targets.push_back(t.rows(idx));
  out.causal_masks = causal_masks;
  return out;
}

Dataset Dataset::first_rows(std::size_t n) const {
  n = std::min(n, rows());
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return subset(idx);
}

Dataset Dataset::select_tasks(std::span<const std::size_t> tasks) const {
  Dataset out;
  out.name = name;
  out.x = x;
  for (std::size_t t : tasks) {
    if (t >= targets.size()) throw DataError("select_tasks: unknown task");
    out.targets.push_back(targets[t]);
    out.causal_masks.push_back(causal_masks.at(t));
  }
  return out;
}

void Dataset::validate() const {
  if (x.rank() != 2 || rows() == 0) throw DataError(name + ": inputs must be a non-empty matrix");
  if (causal_masks.size() != targets.size()) {
    throw DataError(name + ": one causal mask per task required");
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t].y.size() != rows()) {
      throw DataError(name + ": task " + std::to_string(t) + " has " +
                      std::to_string(targets[t].y.size()) + " labels for " +
                      std::to_string(rows()) + " rows");
    }
    if (causal_masks[t].size() != dim()) {
      throw DataError(name + ": causal mask of task " + std::to_string(t) +
                      " does not match input dim");
    }
  }
  if (!x.all_finite()) throw DataError(name + ": non-finite input values");
}

std::vector<Environment> split_environments(std::span<const Dataset> slices) {
  std::vector<Environment> envs;
  for (const auto& s : slices) {
    if (s.rows() == 0) throw DataError("split_environments: empty slice " + s.name);
    envs.push_back({envs.size(), s.name, &s});
  }
  return envs;
}

std::vector<Environment> split_environments(const Dataset& train, const Dataset& valid) {
  if (train.rows() == 0 || valid.rows() == 0) {
    throw DataError("split_environments: train and valid must be non-empty");
  }
  return {{0, train.name.empty() ? "train" : train.name, &train},
          {1, valid.name.empty() ? "valid" : valid.name, &valid}};
}

double label_agreement(const Dataset& data, std::size_t task_a, std::size_t task_b) {
  const auto& a = data.targets.at(task_a).y;
  const auto& b = data.targets.at(task_b).y;
  if (a.empty()) throw DataError("label_agreement: empty dataset");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace mtcrl
