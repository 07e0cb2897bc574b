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

#include "model/task_loss.hpp"

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

std::string_view task_loss_name(TaskLoss loss) {
  switch (loss) {
    case TaskLoss::kLogistic:
      return "logistic";
    case TaskLoss::kSoftmaxCrossEntropy:
      return "softmax_ce";
    case TaskLoss::kSquared:
      return "squared";
  }
  return "logistic";
}

TaskLoss parse_task_loss(std::string_view name) {
  if (name == "logistic") return TaskLoss::kLogistic;
  if (name == "softmax_ce") return TaskLoss::kSoftmaxCrossEntropy;
  if (name == "squared") return TaskLoss::kSquared;
  throw ConfigError("unknown task loss: " + std::string(name));
}

std::size_t TaskTargets::output_dim() const {
  return loss == TaskLoss::kSoftmaxCrossEntropy ? classes : 1;
}

TaskTargets TaskTargets::rows(std::span<const std::size_t> idx) const {
  TaskTargets out;
  out.loss = loss;
  out.classes = classes;
  out.y.reserve(idx.size());
  for (std::size_t i : idx) out.y.push_back(y.at(i));
  return out;
}

namespace {

void check_prediction(const Tensor& prediction, const TaskTargets& targets) {
  if (targets.y.empty()) throw DataError("task risk of an empty batch");
  Shape expected{targets.y.size(), targets.output_dim()};
  if (prediction.shape() != expected) {
    throw ShapeError("task_risk: prediction shape " + shape_string(prediction.shape()) +
                     " does not match targets " + shape_string(expected));
  }
}

std::vector<std::size_t> class_labels(const TaskTargets& targets) {
  std::vector<std::size_t> labels(targets.y.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double v = targets.y[i];
    if (targets.loss == TaskLoss::kLogistic) {
      if (v != 1.0 && v != -1.0) throw DataError("logistic labels must be +-1");
      labels[i] = v > 0 ? 1 : 0;
    } else {
      if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)) ||
          static_cast<std::size_t>(v) >= targets.classes) {
        throw DataError("class label out of range");
      }
      labels[i] = static_cast<std::size_t>(v);
    }
  }
  return labels;
}

}  // namespace

Tensor task_risk(const Tensor& prediction, const TaskTargets& targets) {
  check_prediction(prediction, targets);
  switch (targets.loss) {
    case TaskLoss::kLogistic: {
      Tensor half = scale(prediction, 0.5);
      std::vector<Tensor> logits{neg(half), half};
      return softmax_cross_entropy(concat(logits, 1), class_labels(targets));
    }
    case TaskLoss::kSoftmaxCrossEntropy:
      return softmax_cross_entropy(prediction, class_labels(targets));
    case TaskLoss::kSquared: {
      Array y = Array::column(targets.y);
      Tensor target = constant_like(prediction, std::move(y));
      return mean(square(prediction - target));
    }
  }
  throw ConfigError("unknown task loss");
}

double task_accuracy(const Array& prediction, const TaskTargets& targets) {
  std::size_t n = targets.y.size();
  if (n == 0) throw DataError("accuracy of an empty batch");
  if (prediction.rank() != 2 || prediction.rows() != n ||
      prediction.cols() != targets.output_dim()) {
    throw ShapeError("task_accuracy: prediction shape " + shape_string(prediction.shape()) +
                     " does not match " + std::to_string(n) + " targets");
  }
  if (targets.loss == TaskLoss::kSquared) {
    double se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = prediction[i] - targets.y[i];
      se += d * d;
    }
    return -se / static_cast<double>(n);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets.loss == TaskLoss::kLogistic) {
      double s = prediction[i];
      correct += (s > 0 ? 1.0 : -1.0) == targets.y[i];
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < targets.classes; ++c) {
        if (prediction.at(i, c) > prediction.at(i, best)) best = c;
      }
      correct += static_cast<double>(best) == targets.y[i];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace mtcrl
