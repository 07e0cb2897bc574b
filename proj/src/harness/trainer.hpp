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

#include <json.hpp>

#include "common/error.hpp"
#include "data/environment.hpp"
#include "harness/config.hpp"
#include "harness/optimizer.hpp"
#include "harness/report.hpp"
#include "model/modular_model.hpp"

namespace mtcrl {

// A non-finite loss or metric stopped a run; `snapshot` describes the state.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, nlohmann::json snapshot)
      : NumericError(what), snapshot_(std::move(snapshot)) {}
  const nlohmann::json& snapshot() const noexcept { return snapshot_; }

 private:
  nlohmann::json snapshot_;
};

struct StepOptions {
  PenaltyWeights weights;
  bool detach_heads = true;
};

struct StepMetrics {
  std::vector<double> risks;
  double risk_sum = 0.0;
  double decor = 0.0;
  double graph = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

// Gradients aligned with model.parameters(): `main` of the minibatch loss
// over every parameter, `penalty` of the weighted invariance penalty.
struct StepGradients {
  std::vector<Array> main;
  std::vector<Array> penalty;
  StepMetrics metrics;
};

// Task risks and decorrelation per task on rows `batch_rows` of envs[0],
// graph regularization on A, then the penalty over every environment's
// full slice. With detached heads the G-IRM gradient reaches only theta
// and the encoders; the IRM baseline differentiates every parameter.
StepGradients compute_step_gradients(const ModularModel& model,
                                     std::span<const std::size_t> batch_rows,
                                     std::span<const Environment> envs,
                                     const StepOptions& options);

// One optimizer update with main + penalty gradients.
StepMetrics train_step(ModularModel& model, Optimizer& optimizer,
                       std::span<const std::size_t> batch_rows,
                       std::span<const Environment> envs, const StepOptions& options);

// Generates or composes the configured dataset.
SplitData load_dataset(const TrainConfig& config);

struct RunOutput {
  RunReport report;
  ModularModel model;
  SplitData data;
};

// Full training run on an already loaded dataset.
RunOutput train_on(const TrainConfig& config, SplitData data);
RunOutput train_run(const TrainConfig& config);
RunReport train(const TrainConfig& config);

// Metrics of `model` on `data` without training.
void evaluate_into(const ModularModel& model, const SplitData& data, const TrainConfig& config,
                   RunReport& report);

}  // namespace mtcrl
