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

#include "model/modular_model.hpp"

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

std::string_view routing_mode_name(RoutingMode m) {
  switch (m) {
    case RoutingMode::kLearned:
      return "learned";
    case RoutingMode::kFixedOnes:
      return "fixed_ones";
    case RoutingMode::kFixedIdentity:
      return "fixed_identity";
  }
  return "learned";
}

RoutingMode parse_routing_mode(std::string_view name) {
  if (name == "learned") return RoutingMode::kLearned;
  if (name == "fixed_ones") return RoutingMode::kFixedOnes;
  if (name == "fixed_identity") return RoutingMode::kFixedIdentity;
  throw ConfigError("unknown routing mode: " + std::string(name));
}

MlpSpec ModelSpec::encoder_spec() const {
  MlpSpec s;
  s.widths.push_back(input_dim);
  s.widths.insert(s.widths.end(), encoder_hidden.begin(), encoder_hidden.end());
  s.widths.push_back(module_dim());
  s.activation = encoder_activation;
  s.activate_output = encoder_output_activation;
  return s;
}

MlpSpec ModelSpec::head_spec(std::size_t task) const {
  MlpSpec s;
  s.widths.push_back(module_dim());
  if (!identity_heads) {
    s.widths.insert(s.widths.end(), head_hidden.begin(), head_hidden.end());
    s.widths.push_back(task_output_dims.at(task));
  }
  s.activation = head_activation;
  return s;
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("model input_dim must be positive");
  if (tasks == 0) throw ConfigError("model needs at least one task");
  if (modules == 0) throw ConfigError("model needs at least one module");
  if (rep_dim == 0 || rep_dim % modules != 0) {
    throw ConfigError("rep_dim " + std::to_string(rep_dim) + " is not divisible by K=" +
                      std::to_string(modules));
  }
  if (task_output_dims.size() != tasks) {
    throw ConfigError("task_output_dims needs one entry per task");
  }
  for (std::size_t w : encoder_hidden) {
    if (w == 0) throw ConfigError("encoder widths must be positive");
  }
  for (std::size_t w : head_hidden) {
    if (w == 0) throw ConfigError("head widths must be positive");
  }
  for (std::size_t d : task_output_dims) {
    if (d == 0) throw ConfigError("task output dims must be positive");
    if (identity_heads && d != module_dim()) {
      throw ConfigError("identity heads need output dim equal to the module dim");
    }
  }
  if (routing == RoutingMode::kFixedIdentity && modules != tasks) {
    throw ConfigError("fixed identity routing needs one module per task");
  }
}

ModularModel::ModularModel(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  if (spec_.routing == RoutingMode::kLearned) {
    theta_index_ = params_.size();
    params_.push_back({"theta", ParamGroup::kRouting, 0, Array(Shape{spec_.tasks, spec_.modules})});
  }
  MlpSpec enc = spec_.encoder_spec();
  encoder_indices_.resize(spec_.modules);
  for (std::size_t i = 0; i < spec_.modules; ++i) {
    auto weights = init_mlp(enc, rng);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      encoder_indices_[i].push_back(params_.size());
      params_.push_back({"encoder" + std::to_string(i) + (j % 2 ? ".b" : ".W") +
                             std::to_string(j / 2),
                         ParamGroup::kEncoder, i, std::move(weights[j])});
    }
  }
  head_indices_.resize(spec_.tasks);
  for (std::size_t t = 0; t < spec_.tasks; ++t) {
    auto weights = init_mlp(spec_.head_spec(t), rng);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      head_indices_[t].push_back(params_.size());
      params_.push_back({"head" + std::to_string(t) + (j % 2 ? ".b" : ".W") +
                             std::to_string(j / 2),
                         ParamGroup::kHead, t, std::move(weights[j])});
    }
  }
}

std::size_t ModularModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

namespace {

Array fixed_routing(const ModelSpec& spec) {
  if (spec.routing == RoutingMode::kFixedOnes) {
    return Array(Shape{spec.tasks, spec.modules}, 1.0);
  }
  Array a(Shape{spec.tasks, spec.modules});
  for (std::size_t t = 0; t < spec.tasks; ++t) a.at(t, t) = 1.0;
  return a;
}

}  // namespace

Array ModularModel::routing_weights() const {
  if (theta_index_ == npos) return fixed_routing(spec_);
  return mtcrl::routing_weights(params_[theta_index_].value);
}

const std::vector<std::size_t>& ModularModel::encoder_indices(std::size_t module) const {
  if (module >= spec_.modules) throw DomainError("unknown module " + std::to_string(module));
  return encoder_indices_[module];
}

const std::vector<std::size_t>& ModularModel::head_indices(std::size_t task) const {
  if (task >= spec_.tasks) throw DomainError("unknown task " + std::to_string(task));
  return head_indices_[task];
}

Array routing_weights(const Array& theta) {
  Tape tape;
  return sigmoid(tape.constant(theta)).value();
}

Tensor route(const Tensor& a_row, std::span<const Tensor> zs) {
  if (a_row.rank() != 2 || a_row.shape()[0] != 1 || a_row.shape()[1] != zs.size()) {
    throw ShapeError("route: routing row of shape " + shape_string(a_row.shape()) +
                     " does not match " + std::to_string(zs.size()) + " modules");
  }
  Tensor fused;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    Tensor term = slice(a_row, 1, i, i + 1) * zs[i];
    fused = fused.defined() ? fused + term : term;
  }
  return fused;
}

BoundModel::BoundModel(const ModularModel& model, Tape& tape) : model_(&model), tape_(&tape) {
  tensors_.reserve(model.parameters().size());
  for (const auto& p : model.parameters()) tensors_.push_back(tape.parameter(p.value));
}

BoundModel::BoundModel(const ModularModel& model, Tape& tape, std::vector<Tensor> tensors)
    : model_(&model), tape_(&tape), tensors_(std::move(tensors)) {
  const auto& params = model.parameters();
  if (tensors_.size() != params.size()) {
    throw ShapeError("BoundModel: expected " + std::to_string(params.size()) + " tensors");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors_[i].shape() != params[i].value.shape()) {
      throw ShapeError("BoundModel: tensor for " + params[i].name + " has shape " +
                       shape_string(tensors_[i].shape()));
    }
  }
}

std::vector<Tensor> BoundModel::group(ParamGroup g) const {
  std::vector<Tensor> out;
  const auto& params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].group == g) out.push_back(tensors_[i]);
  }
  return out;
}

std::vector<Tensor> BoundModel::head_tensors(std::size_t task) const {
  std::vector<Tensor> out;
  for (std::size_t i : model_->head_indices(task)) out.push_back(tensors_[i]);
  return out;
}

Tensor BoundModel::theta() const {
  std::size_t i = model_->theta_index();
  return i == ModularModel::npos ? Tensor() : tensors_[i];
}

Tensor BoundModel::routing() const {
  Tensor th = theta();
  if (th.defined()) return sigmoid(th);
  return tape_->constant(model_->routing_weights());
}

Tensor BoundModel::routing_row(std::size_t task) const {
  check_task(task);
  return slice(routing(), 0, task, task + 1);
}

Tensor BoundModel::encode_module(std::size_t module, const Tensor& x) const {
  const auto& idx = model_->encoder_indices(module);
  std::vector<Tensor> params;
  for (std::size_t i : idx) params.push_back(tensors_[i]);
  return mlp_forward(model_->spec().encoder_spec(), params, x);
}

std::vector<Tensor> BoundModel::encode(const Tensor& x) const {
  std::vector<Tensor> zs;
  for (std::size_t i = 0; i < model_->modules(); ++i) zs.push_back(encode_module(i, x));
  return zs;
}

Tensor BoundModel::fuse(std::size_t task, std::span<const Tensor> zs, const Tensor& a_row) const {
  check_task(task);
  if (zs.size() != model_->modules()) {
    throw ShapeError("fuse: expected " + std::to_string(model_->modules()) + " module outputs");
  }
  switch (model_->spec().routing) {
    case RoutingMode::kLearned:
      return route(a_row, zs);
    case RoutingMode::kFixedIdentity:
      return zs[task];
    case RoutingMode::kFixedOnes: {
      Tensor fused = zs[0];
      for (std::size_t i = 1; i < zs.size(); ++i) fused = fused + zs[i];
      return fused;
    }
  }
  return zs[task];
}

Tensor BoundModel::head(std::size_t task, const Tensor& fused) const {
  check_task(task);
  return mlp_forward(model_->spec().head_spec(task), head_tensors(task), fused);
}

Tensor BoundModel::predict(std::size_t task, const Tensor& x) const {
  check_task(task);
  if (model_->spec().routing == RoutingMode::kFixedIdentity) {
    return head(task, encode_module(task, x));
  }
  auto zs = encode(x);
  Tensor a_row = theta().defined() ? routing_row(task) : Tensor();
  return head(task, fuse(task, zs, a_row));
}

void BoundModel::check_task(std::size_t task) const {
  if (task >= model_->tasks()) {
    throw DomainError("unknown task id " + std::to_string(task) + " (model has " +
                      std::to_string(model_->tasks()) + " tasks)");
  }
}

}  // namespace mtcrl
