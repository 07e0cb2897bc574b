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

#include "analysis/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

namespace {

Array row_block(const Array& x, std::size_t begin, std::size_t end) {
  std::size_t cols = x.cols();
  Array out({end - begin, cols});
  auto src = x.values();
  std::copy(src.begin() + begin * cols, src.begin() + end * cols, out.values().begin());
  return out;
}

}  // namespace

std::vector<double> factor_gradient(const ModularModel& model, std::size_t task,
                                    const Dataset& data, const SaliencyOptions& options) {
  if (task >= model.tasks() || task >= data.tasks()) {
    throw DomainError("factor_gradient: unknown task " + std::to_string(task));
  }
  if (data.dim() != model.spec().input_dim) {
    throw ShapeError("factor_gradient: dataset has " + std::to_string(data.dim()) +
                     " dims, model expects " + std::to_string(model.spec().input_dim));
  }
  const TaskTargets& targets = data.targets[task];
  std::size_t chunk = std::max<std::size_t>(1, options.chunk_rows);
  std::vector<double> total(data.dim(), 0.0);
  for (std::size_t begin = 0; begin < data.rows(); begin += chunk) {
    std::size_t end = std::min(data.rows(), begin + chunk);
    Tape tape;
    BoundModel bound(model, tape);
    Tensor x = tape.variable(row_block(data.x, begin, end));
    Tensor out = bound.predict(task, x);
    Tensor score;
    if (targets.loss == TaskLoss::kSoftmaxCrossEntropy) {
      Array onehot({end - begin, targets.classes});
      for (std::size_t r = begin; r < end; ++r) {
        onehot.at(r - begin, static_cast<std::size_t>(targets.y[r])) = 1.0;
      }
      Tensor scores = options.softmax_probability ? softmax(out) : out;
      score = sum(scores * tape.constant(std::move(onehot)));
    } else {
      score = sum(out);
    }
    GradMap g = grad(score, {x});
    auto values = g.at(x).value().values();
    std::size_t cols = data.dim();
    for (std::size_t r = 0; r < end - begin; ++r) {
      for (std::size_t j = 0; j < cols; ++j) total[j] += std::abs(values[r * cols + j]);
    }
  }
  return total;
}

double spurious_score(std::span<const double> grad, const std::vector<bool>& causal_mask) {
  if (grad.size() != causal_mask.size()) {
    throw ShapeError("spurious_score: gradient has " + std::to_string(grad.size()) +
                     " dims, mask has " + std::to_string(causal_mask.size()));
  }
  double all = 0.0, spurious = 0.0;
  for (std::size_t j = 0; j < grad.size(); ++j) {
    if (grad[j] < 0 || !std::isfinite(grad[j])) {
      throw DomainError("spurious_score: gradient mass must be finite and non-negative");
    }
    all += grad[j];
    if (!causal_mask[j]) spurious += grad[j];
  }
  if (!(all > 0.0)) throw DegenerateError("spurious_score: total gradient mass is zero");
  return spurious / all;
}

SaliencyReport saliency_report(const ModularModel& model, const Dataset& data,
                               const SaliencyOptions& options) {
  SaliencyReport report;
  for (std::size_t t = 0; t < model.tasks(); ++t) {
    report.grads.push_back(factor_gradient(model, t, data, options));
    report.rho_spur.push_back(spurious_score(report.grads.back(), data.causal_masks.at(t)));
    report.mean_rho_spur += report.rho_spur.back();
  }
  if (!report.rho_spur.empty()) report.mean_rho_spur /= static_cast<double>(report.rho_spur.size());
  return report;
}

}  // namespace mtcrl
