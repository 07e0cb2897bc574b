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

#include "model/modular_model.hpp"
#include "model/task_loss.hpp"
#include "tensor/tape.hpp"

namespace mtcrl {

enum class GirmVariant { kNone, kNorm, kVar, kIrmBaseline };

std::string_view girm_variant_name(GirmVariant v);
GirmVariant parse_girm_variant(std::string_view name);

struct PenaltyWeights {
  double lambda_decor = 20.0;
  double lambda_sps = 0.2;
  double lambda_bal = 5.0;
  double lambda_girm = 5.0;
  GirmVariant girm_variant = GirmVariant::kVar;

  // Throws ConfigError for negative weights.
  void validate() const;
};

struct PearsonOptions {
  // Added to each variance inside its square root.
  double epsilon = 1e-8;
  // Throw DegenerateError when a column variance falls below `variance_floor`.
  bool strict = false;
  double variance_floor = 1e-12;
};

// In-batch Pearson correlation between the columns of zi (B x p) and
// zj (B x q), centered on the batch mean, as a p x q tensor.
Tensor pearson_corr(const Tensor& zi, const Tensor& zj, const PearsonOptions& options = {});

// lambda * sum_{i<j} ||pearson_corr(Z_i, Z_j)||_F^2.
Tensor decorrelation_loss(std::span<const Tensor> zs, double lambda,
                          const PearsonOptions& options = {});

// lambda_sps * ||A||_1 - lambda_bal * Entropy(column mass of A). An all-zero
// A yields 0 and sets *degenerate.
Tensor graph_reg_loss(const Tensor& a, double lambda_sps, double lambda_bal,
                      bool* degenerate = nullptr);

// Entropy of the normalized column sums of A, with 0 ln 0 = 0.
Tensor routing_entropy(const Tensor& a);

// Forward pass of every task on one environment, keeping the routing rows
// that the G-IRM gradients are taken against.
struct EnvironmentForward {
  std::vector<Tensor> zs;
  Tensor routing;
  std::vector<Tensor> rows;
  std::vector<Tensor> fused;
  std::vector<Tensor> outputs;
  std::vector<Tensor> risks;
  std::span<const TaskTargets> targets;
};

EnvironmentForward forward_environment(const BoundModel& model, const Tensor& x,
                                       std::span<const TaskTargets> targets);

// Mean loss of task t on a batch.
Tensor env_task_risk(const BoundModel& model, const Tensor& x, const TaskTargets& targets,
                     std::size_t task);

// Risk of task t on an environment with the head weights replaced by
// constants, so nothing differentiated from it reaches the head.
Tensor detached_head_risk(const BoundModel& model, const EnvironmentForward& env,
                          std::size_t task);

// grads[t][e] = d R^e_t / d A_t (1 x K), recorded with create_graph. With
// `detach_heads` the risks are recomputed through constant head weights.
using EnvGradientSet = std::vector<std::vector<Tensor>>;
EnvGradientSet env_gradients(const BoundModel& model, std::span<const EnvironmentForward> envs,
                             bool detach_heads = true);

// sum_t sum_e ||g_te||^2.
Tensor girm_norm_penalty(const EnvGradientSet& grads);
// sum_t sum_e (1/|E|) ||g_te - mean_e g_te||^2.
Tensor girm_var_penalty(const EnvGradientSet& grads);
// sum_t sum_e ||d R^e_t / d (A_t, f_t)||^2 with heads participating.
Tensor irm_baseline_penalty(const BoundModel& model, std::span<const EnvironmentForward> envs);

struct LossTerms {
  std::vector<Tensor> risks;
  Tensor risk_sum;
  Tensor decor;
  Tensor graph;
  // Weighted penalty; undefined when no penalty applies.
  Tensor penalty;
  Tensor total;
  bool graph_degenerate = false;
};

// Task risks on `train`, decorrelation on the training modules, graph
// regularization on A, and optionally lambda_girm times the selected
// penalty over all environments. `envs[0]` must be the training
// environment. The G-IRM variants see constant heads when `detach_heads`
// is set; the IRM baseline always differentiates through the heads.
LossTerms total_regularized_loss(const BoundModel& model,
                                 std::span<const EnvironmentForward> envs,
                                 const PenaltyWeights& weights, bool include_penalty = true,
                                 bool detach_heads = true);

// The G-IRM or IRM penalty (unweighted) selected by `variant`.
Tensor girm_penalty(const BoundModel& model, std::span<const EnvironmentForward> envs,
                    GirmVariant variant, bool detach_heads = true);

}  // namespace mtcrl
