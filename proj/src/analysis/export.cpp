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

#include "analysis/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace mtcrl {

namespace {

std::ostringstream number_stream() {
  std::ostringstream out;
  out.precision(17);
  return out;
}

}  // namespace

std::string matrix_csv(const Array& m, const std::string& row_label,
                       const std::string& col_prefix) {
  if (m.rank() != 2) throw ShapeError("matrix_csv: expected a rank-2 array");
  auto out = number_stream();
  out << row_label;
  for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << col_prefix << j;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << i;
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << m.at(i, j);
    out << '\n';
  }
  return out.str();
}

std::string saliency_csv(const SaliencyReport& report,
                         const std::vector<std::vector<bool>>& causal_masks) {
  auto out = number_stream();
  out << "task,dim,grad,causal\n";
  for (std::size_t t = 0; t < report.grads.size(); ++t) {
    const auto& g = report.grads[t];
    if (causal_masks.at(t).size() != g.size()) throw ShapeError("saliency_csv: mask size mismatch");
    for (std::size_t j = 0; j < g.size(); ++j) {
      out << t << ',' << j << ',' << g[j] << ',' << (causal_masks[t][j] ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string heatmap_svg(const Array& m, const SvgOptions& options) {
  if (m.rank() != 2) throw ShapeError("heatmap_svg: expected a rank-2 array");
  if (!(options.max_abs > 0)) throw DomainError("heatmap_svg: max_abs must be positive");
  std::size_t c = options.cell_px, w = m.cols() * c, h = m.rows() * c;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double v = std::clamp(std::abs(m.at(i, j)) / options.max_abs, 0.0, 1.0);
      if (!std::isfinite(m.at(i, j))) v = 1.0;
      int level = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      out << "<rect x=\"" << j * c << "\" y=\"" << i * c << "\" width=\"" << c << "\" height=\"" << c
          << "\" fill=\"rgb(" << level << ',' << level << ',' << level << ")\"/>\n";
    }
  }
  for (std::size_t s : options.separators) {
    if (s == 0) continue;
    if (s < m.cols()) {
      out << "<line x1=\"" << s * c << "\" y1=\"0\" x2=\"" << s * c << "\" y2=\"" << h
          << "\" stroke=\"red\" stroke-width=\"1\"/>\n";
    }
    if (s < m.rows()) {
      out << "<line x1=\"0\" y1=\"" << s * c << "\" x2=\"" << w << "\" y2=\"" << s * c
          << "\" stroke=\"red\" stroke-width=\"1\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mtcrl
