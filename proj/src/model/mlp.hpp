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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tensor/tape.hpp"

namespace mtcrl {

enum class Activation { kTanh, kRelu, kIdentity };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

// Fully connected network. `widths` lists input, hidden and output sizes;
// a single entry denotes the identity map.
struct MlpSpec {
  std::vector<std::size_t> widths;
  Activation activation = Activation::kTanh;
  // Apply the activation after the last layer as well.
  bool activate_output = false;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t layers() const { return widths.size() - 1; }
};

// Weights as [W_0, b_0, W_1, b_1, ...] with W_l of shape in x out and b_l of
// shape 1 x out, drawn uniformly from +-1/sqrt(fan_in).
std::vector<Array> init_mlp(const MlpSpec& spec, std::mt19937_64& rng);

// Zero-parameter layers are allowed; `params` must hold 2 * layers() tensors.
Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& x);

}  // namespace mtcrl
