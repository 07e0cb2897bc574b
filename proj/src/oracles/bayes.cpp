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

#include "oracles/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace mtcrl {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("bayes: factor and weight lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(w1 e^x1 + w2 e^x2) for non-negative weights, not both zero.
double log_mix(double w1, double x1, double w2, double x2) {
  if (w1 == 0.0) return std::log(w2) + x2;
  if (w2 == 0.0) return std::log(w1) + x1;
  double a = std::log(w1) + x1, b = std::log(w2) + x2;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_gaussian(std::span<const double> f, std::span<const double> mean, double sign,
                    double sigma) {
  double sq = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double d = f[i] - sign * mean[i];
    sq += d * d;
  }
  double k = static_cast<double>(f.size());
  return -0.5 * sq / (sigma * sigma) - k * std::log(sigma) - 0.5 * k * std::log(2 * std::numbers::pi);
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

BayesParams BayesParams::from_gaussian(std::span<const double> mu_a, double sigma_a,
                                       std::span<const double> mu_b, double sigma_b, double m_c) {
  if (!(sigma_a > 0) || !(sigma_b > 0)) throw DomainError("bayes: sigma must be positive");
  BayesParams p;
  for (double v : mu_a) p.beta_a.push_back(v / (sigma_a * sigma_a));
  for (double v : mu_b) p.beta_b.push_back(v / (sigma_b * sigma_b));
  p.m_c = m_c;
  p.validate();
  return p;
}

void BayesParams::validate() const {
  if (!(m_c >= 0.0 && m_c <= 1.0)) throw DomainError("bayes: m_C must lie in [0, 1]");
  for (const auto* v : {&beta_a, &beta_b}) {
    for (double x : *v) {
      if (!std::isfinite(x)) throw DomainError("bayes: beta must be finite");
    }
  }
}

double bayes_logit(std::span<const double> f_a, std::span<const double> f_b,
                   const BayesParams& params) {
  params.validate();
  double s_a = dot(f_a, params.beta_a);
  double s_b = dot(f_b, params.beta_b);
  double m = params.m_c;
  double coupling = log_mix(m, s_b, 1.0 - m, -s_b) - log_mix(m, -s_b, 1.0 - m, s_b);
  return 2.0 * s_a + coupling;
}

double bayes_posterior(std::span<const double> f_a, std::span<const double> f_b,
                       const BayesParams& params) {
  return sigmoid(bayes_logit(f_a, f_b, params));
}

double bayes_posterior_enumerated(std::span<const double> f_a, std::span<const double> f_b,
                                  std::span<const double> mu_a, double sigma_a,
                                  std::span<const double> mu_b, double sigma_b, double m_c) {
  if (f_a.size() != mu_a.size() || f_b.size() != mu_b.size()) {
    throw ShapeError("bayes: factor and mean lengths differ");
  }
  double joint[2][2];
  for (int ia = 0; ia < 2; ++ia) {
    for (int ib = 0; ib < 2; ++ib) {
      double ya = ia ? 1.0 : -1.0, yb = ib ? 1.0 : -1.0;
      double prior = 0.5 * (ya == yb ? m_c : 1.0 - m_c);
      joint[ia][ib] = prior == 0.0 ? -INFINITY
                                   : std::log(prior) + log_gaussian(f_a, mu_a, ya, sigma_a) +
                                         log_gaussian(f_b, mu_b, yb, sigma_b);
    }
  }
  auto lse = [](double a, double b) {
    double m = std::max(a, b);
    if (m == -INFINITY) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  };
  double pos = lse(joint[1][0], joint[1][1]);
  double neg = lse(joint[0][0], joint[0][1]);
  return sigmoid(pos - neg);
}

BayesWeights bayes_weight_extremes(const BayesParams& params) {
  params.validate();
  BayesWeights w;
  for (double v : params.beta_a) w.w_a.push_back(2.0 * v);
  if (params.m_c == 1.0) {
    for (double v : params.beta_b) w.w_b.push_back(2.0 * v);
  } else if (params.m_c == 0.5) {
    w.w_b.assign(params.beta_b.size(), 0.0);
  } else {
    throw DomainError("bayes: linear weights exist only for m_C in {0.5, 1}");
  }
  return w;
}

}  // namespace mtcrl
