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
#include <string>
#include <vector>

#include "analysis/saliency.hpp"
#include "tensor/array.hpp"

namespace mtcrl {

// Rank-2 array as CSV with a header row; `row_label` names the first column.
std::string matrix_csv(const Array& m, const std::string& row_label = "row",
                       const std::string& col_prefix = "c");

// Long format: task,dim,grad,causal
std::string saliency_csv(const SaliencyReport& report,
                         const std::vector<std::vector<bool>>& causal_masks);

struct SvgOptions {
  std::size_t cell_px = 12;
  // Shade by |value| / max_abs in grayscale (black = max_abs).
  double max_abs = 1.0;
  // Separator lines before these indices on both axes.
  std::vector<std::size_t> separators;
};

std::string heatmap_svg(const Array& m, const SvgOptions& options = {});

// Writes `content`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mtcrl
