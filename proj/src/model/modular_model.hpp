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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "model/mlp.hpp"
#include "tensor/tape.hpp"

namespace mtcrl {

enum class RoutingMode {
  // A = sigmoid(theta) with trainable theta.
  kLearned,
  // Every task uses every module with weight 1 (shared bottom).
  kFixedOnes,
  // Task t uses module t only; requires K == T (independent models).
  kFixedIdentity,
};

std::string_view routing_mode_name(RoutingMode m);
RoutingMode parse_routing_mode(std::string_view name);

struct ModelSpec {
  std::size_t input_dim = 0;
  std::size_t tasks = 1;
  std::size_t modules = 1;
  // Total representation size d; each module emits d / modules features.
  std::size_t rep_dim = 1;
  std::vector<std::size_t> encoder_hidden;
  Activation encoder_activation = Activation::kTanh;
  bool encoder_output_activation = false;
  std::vector<std::size_t> head_hidden;
  Activation head_activation = Activation::kTanh;
  // Output width per task; 1 for a binary score.
  std::vector<std::size_t> task_output_dims;
  RoutingMode routing = RoutingMode::kLearned;
  // Omit head layers: head t returns the fused representation unchanged.
  bool identity_heads = false;

  std::size_t module_dim() const { return rep_dim / modules; }
  MlpSpec encoder_spec() const;
  MlpSpec head_spec(std::size_t task) const;
  // Throws ConfigError when the spec is inconsistent.
  void validate() const;
};

enum class ParamGroup { kRouting, kEncoder, kHead };

struct Parameter {
  std::string name;
  ParamGroup group;
  // Module index for encoders, task index for heads.
  std::size_t owner = 0;
  Array value;
};

class ModularModel {
 public:
  ModularModel(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t tasks() const noexcept { return spec_.tasks; }
  std::size_t modules() const noexcept { return spec_.modules; }

  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  // Current routing weights A (T x K).
  Array routing_weights() const;
  // Index of theta in parameters(), or npos when routing is fixed.
  std::size_t theta_index() const noexcept { return theta_index_; }
  const std::vector<std::size_t>& encoder_indices(std::size_t module) const;
  const std::vector<std::size_t>& head_indices(std::size_t task) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  ModelSpec spec_;
  std::vector<Parameter> params_;
  std::size_t theta_index_ = npos;
  std::vector<std::vector<std::size_t>> encoder_indices_;
  std::vector<std::vector<std::size_t>> head_indices_;
};

// Elementwise sigmoid of theta.
Array routing_weights(const Array& theta);

// sum_i A_row[i] * Z_i for a 1 x K row.
Tensor route(const Tensor& a_row, std::span<const Tensor> zs);

// The model's parameters recorded on a tape for one step.
class BoundModel {
 public:
  BoundModel(const ModularModel& model, Tape& tape);
  // Uses existing tensors, aligned with model.parameters(), as the weights.
  BoundModel(const ModularModel& model, Tape& tape, std::vector<Tensor> tensors);

  const ModularModel& model() const noexcept { return *model_; }
  Tape& tape() const noexcept { return *tape_; }
  // Parameter tensors aligned with model().parameters().
  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
  std::vector<Tensor> group(ParamGroup g) const;
  std::vector<Tensor> head_tensors(std::size_t task) const;

  // theta, undefined for fixed routing.
  Tensor theta() const;
  // A = sigmoid(theta), or the fixed routing matrix as a constant.
  Tensor routing() const;
  Tensor routing_row(std::size_t task) const;

  Tensor encode_module(std::size_t module, const Tensor& x) const;
  std::vector<Tensor> encode(const Tensor& x) const;
  // Fused representation for `task`, skipping modules a fixed routing ignores.
  Tensor fuse(std::size_t task, std::span<const Tensor> zs, const Tensor& a_row) const;
  Tensor head(std::size_t task, const Tensor& fused) const;
  Tensor predict(std::size_t task, const Tensor& x) const;

 private:
  void check_task(std::size_t task) const;

  const ModularModel* model_;
  Tape* tape_;
  std::vector<Tensor> tensors_;
};

}  // namespace mtcrl
