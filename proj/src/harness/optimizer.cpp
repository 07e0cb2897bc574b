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

#include "harness/optimizer.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace mtcrl {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {}

void Optimizer::step(std::vector<Parameter>& params, const std::vector<Array>& grads) {
  if (grads.size() != params.size()) {
    throw ShapeError("optimizer: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  if (first_.empty()) {
    for (const auto& p : params) {
      first_.emplace_back(p.value.numel(), 0.0);
      second_.emplace_back(p.value.numel(), 0.0);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value.shape() || first_[i].size() != grads[i].numel()) {
      throw ShapeError("optimizer: gradient for " + params[i].name + " has shape " +
                       shape_string(grads[i].shape()));
    }
  }
  ++steps_;
  const OptimizerConfig& c = config_;
  double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(steps_));
  double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value.values();
    auto g = grads[i].values();
    auto& m = first_[i];
    auto& v = second_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (c.kind == OptimizerKind::kSgd) {
        m[k] = c.momentum * m[k] + g[k];
        w[k] -= c.lr * m[k];
      } else {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        w[k] -= c.lr * (m[k] / bias1) / (std::sqrt(v[k] / bias2) + c.eps);
      }
    }
  }
}

}  // namespace mtcrl
