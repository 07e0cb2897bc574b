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

#include <filesystem>

#include "data/environment.hpp"

namespace mtcrl {

// Binary layout, all integers u64 and all reals f64, little-endian:
//   "MTCRL1" | rows | dim | tasks | per task: loss kind, classes |
//   X (rows x dim) | labels (tasks x rows) | causal masks (tasks x dim, 0/1)
void write_container(const std::filesystem::path& path, const Dataset& data);
Dataset read_container(const std::filesystem::path& path);

// Header x0..x{D-1},y0..y{T-1}, one row per sample.
void write_csv(const std::filesystem::path& path, const Dataset& data);

// Writes train/valid/test as <stem>.bin (and .csv when `csv`) under `dir`.
void write_splits(const std::filesystem::path& dir, const SplitData& splits, bool csv);

}  // namespace mtcrl
