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
#include <vector>

#include "data/environment.hpp"

namespace mtcrl {

// Linear structural equation model with a label-label confounder. Task 1
// labels are Rademacher; Y_{t+1} equals Y_t with probability m_C and -Y_t
// otherwise. Factor F_t ~ N(Y_t mu_t, sigma_t^2 I) and X = [F_1, ..., F_T,
// nuisance].
struct SemSpec {
  std::size_t tasks = 2;
  std::size_t d_factor = 10;
  // Extra N(0, 1) input dims that no task depends on.
  std::size_t nuisance_dims = 0;
  // Radius of the randomly oriented mu_t.
  double mu_norm = 1.0;
  // Explicit mu_t (tasks x d_factor); sampled when empty.
  std::vector<std::vector<double>> mu;
  // Per-task sigma; all ones when empty.
  std::vector<double> sigma;
  double m_train = 0.9;
  double m_valid = 0.7;
  double m_test = 0.1;
  std::size_t n_train = 10000;
  std::size_t n_valid = 10000;
  std::size_t n_test = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t input_dim() const { return tasks * d_factor + nuisance_dims; }
};

struct MultiSemData {
  SplitData splits;
  std::vector<std::vector<double>> mu;
  std::vector<double> sigma;
};

MultiSemData gen_multisem(const SemSpec& spec);

// One slice of `n` samples with agreement probability `m_c`.
Dataset sample_multisem(const SemSpec& spec, const std::vector<std::vector<double>>& mu,
                        const std::vector<double>& sigma, double m_c, std::size_t n,
                        std::mt19937_64& rng, const std::string& name);

}  // namespace mtcrl
