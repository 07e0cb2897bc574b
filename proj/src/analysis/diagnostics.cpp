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

#include "analysis/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

double CorrHeatmap::max_cross_block() const {
  double best = 0.0;
  std::size_t d = corr.rank() == 2 ? corr.rows() : 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (block_of(i) != block_of(j)) best = std::max(best, std::abs(corr.at(i, j)));
    }
  }
  return best;
}

CorrHeatmap module_corr_heatmap(const ModularModel& model, const Array& x,
                                const PearsonOptions& options) {
  if (x.rank() != 2 || x.rows() < 2) {
    throw DomainError("module_corr_heatmap: needs a batch of at least 2 rows");
  }
  Tape tape;
  NoGradGuard guard(tape);
  BoundModel bound(model, tape);
  std::vector<Tensor> zs = bound.encode(tape.constant(x));
  Tensor z = concat(zs, 1);
  CorrHeatmap map;
  map.corr = pearson_corr(z, z, options).value();
  map.module_dim = model.spec().module_dim();
  for (std::size_t i = 0; i < model.modules(); ++i) map.block_starts.push_back(i * map.module_dim);
  return map;
}

TaskModuleGradients task_module_gradients(const ModularModel& model,
                                          std::span<const Environment> envs) {
  if (envs.size() < 2) throw DomainError("task_module_gradients: needs at least 2 environments");
  std::size_t tasks = model.tasks(), modules = model.modules();
  Array a = model.routing_weights();
  TaskModuleGradients out;
  for (const auto& env : envs) {
    if (env.data == nullptr) throw DataError("task_module_gradients: empty environment");
    Tape tape;
    BoundModel bound(model, tape);
    std::vector<Tensor> zs = bound.encode(tape.constant(env.data->x));
    Array table({tasks, modules});
    for (std::size_t t = 0; t < tasks; ++t) {
      std::vector<double> row(a.values().begin() + t * modules,
                              a.values().begin() + (t + 1) * modules);
      // A free copy of the routing row; at the current weights route()
      // reproduces the fused representation of every routing mode.
      Tensor a_row = tape.variable(Array::row(row));
      Tensor risk = task_risk(bound.head(t, route(a_row, zs)), env.data->targets.at(t));
      GradMap g = grad(risk, {a_row});
      auto values = g.at(a_row).value().values();
      for (std::size_t i = 0; i < modules; ++i) table.at(t, i) = values[i];
    }
    out.per_env.push_back(std::move(table));
  }
  out.difference = Array({tasks, modules});
  for (std::size_t k = 0; k < tasks * modules; ++k) {
    out.difference[k] = out.per_env[1][k] - out.per_env[0][k];
  }
  return out;
}

SimilarityGraph task_similarity(const Array& a, double threshold) {
  if (a.rank() != 2) throw ShapeError("task_similarity: routing matrix must be rank 2");
  for (double v : a.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("task_similarity: routing weights must lie in [0, 1]");
  }
  std::size_t tasks = a.rows(), modules = a.cols();
  std::vector<double> norms(tasks, 0.0);
  for (std::size_t t = 0; t < tasks; ++t) {
    for (std::size_t i = 0; i < modules; ++i) norms[t] += a.at(t, i) * a.at(t, i);
    norms[t] = std::sqrt(norms[t]);
  }
  SimilarityGraph g;
  g.threshold = threshold;
  g.similarity = Array({tasks, tasks});
  g.adjacency = Array({tasks, tasks});
  for (std::size_t s = 0; s < tasks; ++s) {
    for (std::size_t t = 0; t < tasks; ++t) {
      double sim = 0.0;
      if (s == t) {
        sim = 1.0;
      } else if (norms[s] > 0 && norms[t] > 0) {
        double dot = 0.0;
        for (std::size_t i = 0; i < modules; ++i) dot += a.at(s, i) * a.at(t, i);
        sim = std::clamp(dot / (norms[s] * norms[t]), 0.0, 1.0);
      }
      g.similarity.at(s, t) = sim;
      g.adjacency.at(s, t) = (s != t && sim >= threshold) ? 1.0 : 0.0;
    }
  }
  return g;
}

}  // namespace mtcrl
