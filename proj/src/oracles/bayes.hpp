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

#include <span>
#include <vector>

namespace mtcrl {

// Two-task Gaussian model: F_t ~ N(Y_t mu_t, sigma_t^2 I), P(Y_a = Y_b) = m_c,
// balanced labels. beta_t = mu_t / sigma_t^2.
struct BayesParams {
  std::vector<double> beta_a;
  std::vector<double> beta_b;
  double m_c = 0.5;

  static BayesParams from_gaussian(std::span<const double> mu_a, double sigma_a,
                                   std::span<const double> mu_b, double sigma_b, double m_c);
  void validate() const;
};

// log P(Y_a = 1 | F_a, F_b) - log P(Y_a = -1 | F_a, F_b).
double bayes_logit(std::span<const double> f_a, std::span<const double> f_b,
                   const BayesParams& params);
// P(Y_a = 1 | F_a, F_b).
double bayes_posterior(std::span<const double> f_a, std::span<const double> f_b,
                       const BayesParams& params);

// Posterior by summing the joint density over all four (Y_a, Y_b) labelings
// with full Gaussian likelihoods.
double bayes_posterior_enumerated(std::span<const double> f_a, std::span<const double> f_b,
                                  std::span<const double> mu_a, double sigma_a,
                                  std::span<const double> mu_b, double sigma_b, double m_c);

// Linear weights on (F_a, F_b) of the Bayes logit, defined only at m_c = 1
// ([2 beta_a, 2 beta_b]) and m_c = 0.5 ([2 beta_a, 0]).
struct BayesWeights {
  std::vector<double> w_a;
  std::vector<double> w_b;
};
BayesWeights bayes_weight_extremes(const BayesParams& params);

}  // namespace mtcrl
