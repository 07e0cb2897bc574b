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

#include "data/environment.hpp"
#include "model/modular_model.hpp"

namespace mtcrl {

struct SaliencyOptions {
  // Differentiate the true-class softmax probability instead of its logit.
  bool softmax_probability = false;
  // Rows per backward pass.
  std::size_t chunk_rows = 4096;
};

// Grad(F): sum over the dataset of |d score / d x| per input dim, where the
// score is the true-class logit for softmax tasks and the scalar output for
// logistic and regression tasks.
std::vector<double> factor_gradient(const ModularModel& model, std::size_t task,
                                    const Dataset& data, const SaliencyOptions& options = {});

// Share of gradient mass on dims outside the causal mask. Throws
// DegenerateError when the total mass is zero.
double spurious_score(std::span<const double> grad, const std::vector<bool>& causal_mask);

struct SaliencyReport {
  std::vector<std::vector<double>> grads;  // per task
  std::vector<double> rho_spur;            // per task
  double mean_rho_spur = 0.0;
};

SaliencyReport saliency_report(const ModularModel& model, const Dataset& data,
                               const SaliencyOptions& options = {});

}  // namespace mtcrl
