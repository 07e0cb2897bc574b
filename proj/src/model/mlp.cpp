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

#include "model/mlp.hpp"

#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation: " + std::string(name));
}

std::vector<Array> init_mlp(const MlpSpec& spec, std::mt19937_64& rng) {
  if (spec.widths.empty()) throw ConfigError("mlp needs at least an input width");
  for (std::size_t w : spec.widths) {
    if (w == 0) throw ConfigError("mlp widths must be positive");
  }
  std::vector<Array> params;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    std::size_t in = spec.widths[l], out = spec.widths[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Array w(Shape{in, out});
    for (double& v : w.values()) v = u(rng);
    Array b(Shape{1, out});
    for (double& v : b.values()) v = u(rng);
    params.push_back(std::move(w));
    params.push_back(std::move(b));
  }
  return params;
}

namespace {

Tensor activate(Activation a, const Tensor& x) {
  switch (a) {
    case Activation::kTanh:
      return tanh(x);
    case Activation::kRelu:
      return relu(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

}  // namespace

Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& x) {
  if (params.size() != 2 * spec.layers()) {
    throw ShapeError("mlp: expected " + std::to_string(2 * spec.layers()) +
                     " parameter tensors, got " + std::to_string(params.size()));
  }
  if (x.rank() != 2 || x.shape()[1] != spec.input_dim()) {
    throw ShapeError("mlp: input of shape " + shape_string(x.shape()) +
                     " does not match input width " + std::to_string(spec.input_dim()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    h = matmul(h, params[2 * l]) + params[2 * l + 1];
    if (l + 1 < spec.layers() || spec.activate_output) h = activate(spec.activation, h);
  }
  return h;
}

}  // namespace mtcrl
