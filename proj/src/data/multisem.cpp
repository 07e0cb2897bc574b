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

#include "data/multisem.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mtcrl {

void SemSpec::validate() const {
  if (tasks < 1) throw ConfigError("sem: at least one task required");
  if (d_factor < 1) throw ConfigError("sem: d_factor must be positive");
  for (double m : {m_train, m_valid, m_test}) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("sem: m_C must lie in [0, 1]");
  }
  if (!(mu_norm > 0)) throw ConfigError("sem: mu_norm must be positive");
  if (!mu.empty()) {
    if (mu.size() != tasks) throw ConfigError("sem: one mu vector per task required");
    for (const auto& m : mu) {
      if (m.size() != d_factor) throw ConfigError("sem: mu vectors need d_factor entries");
      for (double v : m) {
        if (!std::isfinite(v)) throw ConfigError("sem: mu must be finite");
      }
    }
  }
  if (!sigma.empty()) {
    if (sigma.size() != tasks) throw ConfigError("sem: one sigma per task required");
    for (double s : sigma) {
      if (!(s > 0) || !std::isfinite(s)) throw ConfigError("sem: sigma must be positive");
    }
  }
  for (std::size_t n : {n_train, n_valid, n_test}) {
    if (n < 2) throw ConfigError("sem: each split needs at least 2 samples");
  }
}

Dataset sample_multisem(const SemSpec& spec, const std::vector<std::vector<double>>& mu,
                        const std::vector<double>& sigma, double m_c, std::size_t n,
                        std::mt19937_64& rng, const std::string& name) {
  if (n < 2) throw DataError("sem: n too small for balanced labels");
  const std::size_t T = spec.tasks, d = spec.d_factor, D = spec.input_dim();
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution agree(m_c);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset out;
  out.name = name;
  out.x = Array(Shape{n, D});
  out.targets.assign(T, TaskTargets{TaskLoss::kLogistic, 2, std::vector<double>(n)});
  for (std::size_t i = 0; i < n; ++i) {
    double y = coin(rng) ? 1.0 : -1.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (t > 0 && !agree(rng)) y = -y;
      out.targets[t].y[i] = y;
    }
    double* row = out.x.values().data() + i * D;
    for (std::size_t t = 0; t < T; ++t) {
      double y_t = out.targets[t].y[i];
      for (std::size_t j = 0; j < d; ++j) {
        row[t * d + j] = y_t * mu[t][j] + sigma[t] * noise(rng);
      }
    }
    for (std::size_t j = T * d; j < D; ++j) row[j] = noise(rng);
  }
  out.causal_masks.assign(T, std::vector<bool>(D, false));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) out.causal_masks[t][t * d + j] = true;
  }
  return out;
}

MultiSemData gen_multisem(const SemSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  MultiSemData data;
  data.mu = spec.mu;
  if (data.mu.empty()) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t t = 0; t < spec.tasks; ++t) {
      std::vector<double> v(spec.d_factor);
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& x : v) {
          x = n(rng);
          norm += x * x;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (double& x : v) x *= spec.mu_norm / norm;
      data.mu.push_back(std::move(v));
    }
  }
  data.sigma = spec.sigma.empty() ? std::vector<double>(spec.tasks, 1.0) : spec.sigma;
  data.splits.train =
      sample_multisem(spec, data.mu, data.sigma, spec.m_train, spec.n_train, rng, "train");
  data.splits.valid =
      sample_multisem(spec, data.mu, data.sigma, spec.m_valid, spec.n_valid, rng, "valid");
  data.splits.test =
      sample_multisem(spec, data.mu, data.sigma, spec.m_test, spec.n_test, rng, "test");
  return data;
}

}  // namespace mtcrl
