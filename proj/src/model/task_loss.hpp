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

#include "tensor/tape.hpp"

namespace mtcrl {

enum class TaskLoss {
  // Scalar score s with label y in {-1, +1}; loss log(1 + exp(-y s)).
  kLogistic,
  // One logit per class with an integer class label.
  kSoftmaxCrossEntropy,
  // Scalar regression output.
  kSquared,
};

std::string_view task_loss_name(TaskLoss loss);
TaskLoss parse_task_loss(std::string_view name);

// Labels of one task for every row of a batch.
struct TaskTargets {
  TaskLoss loss = TaskLoss::kLogistic;
  // Number of classes for softmax cross-entropy; 2 for logistic; 1 otherwise.
  std::size_t classes = 2;
  // +-1 labels, class indices, or regression targets.
  std::vector<double> y;

  std::size_t output_dim() const;
  TaskTargets rows(std::span<const std::size_t> idx) const;
};

// Mean task loss over the batch.
Tensor task_risk(const Tensor& prediction, const TaskTargets& targets);

// Fraction of correct predictions: sign agreement for logistic, argmax for
// softmax, and negative mean squared error for regression.
double task_accuracy(const Array& prediction, const TaskTargets& targets);

}  // namespace mtcrl
