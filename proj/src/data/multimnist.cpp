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

#include "data/multimnist.hpp"

#include <algorithm>
#include <random>

#include "common/error.hpp"

namespace mtcrl {

std::size_t MnistPairSpec::samples_per_pair() const {
  if (pairs_per_class_pair > 0) return pairs_per_class_pair;
  return variant == MnistVariant::kBenchmark ? 10000 : 100;
}

std::array<std::vector<LabelPair>, 3> partition_label_pairs(std::size_t classes,
                                                            std::array<std::size_t, 3> ratios,
                                                            std::uint64_t seed) {
  std::size_t weight = ratios[0] + ratios[1] + ratios[2];
  if (classes == 0 || weight == 0) throw ConfigError("multimnist: invalid pair partition");
  std::vector<LabelPair> all;
  for (std::size_t a = 0; a < classes; ++a) {
    for (std::size_t b = 0; b < classes; ++b) all.emplace_back(a, b);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  std::size_t n_train = all.size() * ratios[0] / weight;
  std::size_t n_valid = all.size() * ratios[1] / weight;
  std::array<std::vector<LabelPair>, 3> out;
  out[0].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  out[1].assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                all.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out[2].assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), all.end());
  return out;
}

MultiMnistData compose_multimnist(const MnistPairSpec& spec) {
  return compose_multimnist(spec, load_mnist(spec.images, spec.labels));
}

MultiMnistData compose_multimnist(const MnistPairSpec& spec, const MnistDigits& digits) {
  const std::size_t classes = spec.classes;
  std::vector<std::vector<std::size_t>> pools(classes);
  for (std::size_t i = 0; i < digits.labels.size(); ++i) {
    if (digits.labels[i] >= classes) throw DataError("multimnist: label out of range");
    pools[digits.labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (pools[c].empty()) {
      throw DataError("multimnist: no images of class " + std::to_string(c));
    }
  }
  MultiMnistData out;
  out.rows = digits.images.rows;
  out.cols = 2 * digits.images.cols;
  out.pairs = partition_label_pairs(classes, spec.ratios, spec.split_seed);
  const std::size_t per_pair = spec.samples_per_pair();
  const std::size_t w = digits.images.cols, h = digits.images.rows, D = h * 2 * w;

  std::mt19937_64 rng(spec.split_seed ^ 0x9e3779b97f4a7c15ULL);
  const char* names[3] = {"train", "valid", "test"};
  Dataset* slots[3] = {&out.splits.train, &out.splits.valid, &out.splits.test};
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& pairs = out.pairs[s];
    std::size_t n = pairs.size() * per_pair;
    Dataset& d = *slots[s];
    d.name = names[s];
    if (n == 0) throw DataError(std::string("multimnist: empty ") + names[s] + " split");
    d.x = Array(Shape{n, D});
    d.targets.assign(2, TaskTargets{TaskLoss::kSoftmaxCrossEntropy, classes,
                                    std::vector<double>(n)});
    std::size_t row = 0;
    for (const auto& [a, b] : pairs) {
      std::uniform_int_distribution<std::size_t> pick_a(0, pools[a].size() - 1);
      std::uniform_int_distribution<std::size_t> pick_b(0, pools[b].size() - 1);
      for (std::size_t k = 0; k < per_pair; ++k, ++row) {
        const double* left = digits.images.pixels.values().data() + pools[a][pick_a(rng)] * h * w;
        const double* right = digits.images.pixels.values().data() + pools[b][pick_b(rng)] * h * w;
        double* dst = d.x.values().data() + row * D;
        for (std::size_t r = 0; r < h; ++r) {
          std::copy_n(left + r * w, w, dst + r * 2 * w);
          std::copy_n(right + r * w, w, dst + r * 2 * w + w);
        }
        d.targets[0].y[row] = static_cast<double>(a);
        d.targets[1].y[row] = static_cast<double>(b);
      }
    }
    d.causal_masks.assign(2, std::vector<bool>(D, false));
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        d.causal_masks[0][r * 2 * w + c] = true;
        d.causal_masks[1][r * 2 * w + w + c] = true;
      }
    }
  }
  return out;
}

}  // namespace mtcrl
