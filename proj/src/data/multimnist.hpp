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

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "data/environment.hpp"
#include "data/idx.hpp"

namespace mtcrl {

enum class MnistVariant {
  // Small per-pair counts for saliency analysis.
  kAnalysis,
  // 10,000 samples per label pair.
  kBenchmark,
};

// Two-digit images [left | right] whose label pairs are partitioned so no
// pair seen in one split appears in another.
struct MnistPairSpec {
  std::filesystem::path images;
  std::filesystem::path labels;
  MnistVariant variant = MnistVariant::kAnalysis;
  // Samples per label pair; 0 selects the variant default (100 or 10,000).
  std::size_t pairs_per_class_pair = 0;
  std::uint64_t split_seed = 0;
  std::array<std::size_t, 3> ratios{3, 1, 1};
  std::size_t classes = 10;

  std::size_t samples_per_pair() const;
};

using LabelPair = std::pair<std::size_t, std::size_t>;

struct MultiMnistData {
  SplitData splits;
  std::array<std::vector<LabelPair>, 3> pairs;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Shuffled partition of all classes x classes ordered pairs by `ratios`.
std::array<std::vector<LabelPair>, 3> partition_label_pairs(std::size_t classes,
                                                            std::array<std::size_t, 3> ratios,
                                                            std::uint64_t seed);

MultiMnistData compose_multimnist(const MnistPairSpec& spec);
MultiMnistData compose_multimnist(const MnistPairSpec& spec, const MnistDigits& digits);

}  // namespace mtcrl
