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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/multimnist.hpp"
#include "data/multisem.hpp"
#include "model/modular_model.hpp"
#include "regularizers/regularizers.hpp"

namespace mtcrl {

enum class DatasetKind { kMultiSem, kMultiMnist };
enum class TrainMode {
  // One independent model per task.
  kStl,
  // Multi-task model without regularizers.
  kMtlVanilla,
  kMtcrl,
};
enum class MtlArchitecture {
  // One shared encoder feeding every head.
  kSharedBottom,
  // K modules with learned routing.
  kMmoe,
};
enum class OptimizerKind { kSgd, kAdam };

std::string_view dataset_kind_name(DatasetKind k);
std::string_view train_mode_name(TrainMode m);
std::string_view mtl_architecture_name(MtlArchitecture a);
std::string_view optimizer_kind_name(OptimizerKind k);
DatasetKind parse_dataset_kind(std::string_view s);
TrainMode parse_train_mode(std::string_view s);
MtlArchitecture parse_mtl_architecture(std::string_view s);
OptimizerKind parse_optimizer_kind(std::string_view s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // SGD only.
  double momentum = 0.0;
};

struct ModelConfig {
  std::size_t modules = 8;
  // Width of each module's output.
  std::size_t module_dim = 4;
  std::vector<std::size_t> encoder_hidden{32};
  Activation encoder_activation = Activation::kTanh;
  bool encoder_output_activation = false;
  std::vector<std::size_t> head_hidden;
  Activation head_activation = Activation::kTanh;
};

struct TrainConfig {
  DatasetKind dataset = DatasetKind::kMultiSem;
  SemSpec sem;
  MnistPairSpec mnist;
  // Dataset seed; follows `seed` unless set explicitly.
  bool data_seed_fixed = false;

  TrainMode mode = TrainMode::kMtcrl;
  MtlArchitecture mtl_architecture = MtlArchitecture::kSharedBottom;
  ModelConfig model;
  PenaltyWeights weights;
  OptimizerConfig optimizer;

  std::size_t epochs = 200;
  std::size_t patience = 10;
  // Relative improvement of the train risk that resets patience.
  double min_delta = 1e-4;
  // Rows per step; 0 trains on the full training slice.
  std::size_t batch_size = 256;
  bool detach_heads = true;
  // Report the epoch with the best valid-environment accuracy.
  bool select_on_valid = true;
  // Rows of the evaluation split used for saliency; 0 uses all.
  std::size_t saliency_rows = 2000;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
  // Seed used to generate or compose the dataset.
  std::uint64_t data_seed() const;
  // Effective regularizer weights: zero outside mtcrl mode.
  PenaltyWeights effective_weights() const;
  // Architecture implied by mode, task count and input size.
  ModelSpec model_spec(std::size_t input_dim, const std::vector<std::size_t>& output_dims) const;
};

nlohmann::json config_to_json(const TrainConfig& config);
// Unknown keys raise ConfigError; absent keys keep their defaults.
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);
// Stable 64-bit FNV-1a digest of the canonical JSON, as 16 hex digits.
std::string config_hash(const TrainConfig& config);

}  // namespace mtcrl
