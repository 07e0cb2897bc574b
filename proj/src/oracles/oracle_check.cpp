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

#include "oracles/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "oracles/bayes.hpp"
#include "oracles/linear_regression.hpp"

namespace mtcrl {

namespace {

struct Tally {
  OracleCheckRow row;
  Tally(std::string name, double tol) {
    row.check = std::move(name);
    row.tolerance = tol;
  }
  void add(double error) {
    ++row.cases;
    if (!std::isfinite(error) || error > row.tolerance) ++row.failures;
    if (!std::isfinite(error)) {
      row.max_error = INFINITY;
    } else {
      row.max_error = std::max(row.max_error, error);
    }
  }
};

struct GaussianPair {
  std::vector<double> mu_a, mu_b, f_a, f_b;
  double sigma_a = 1.0, sigma_b = 1.0;
};

GaussianPair draw_pair(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  GaussianPair g;
  g.sigma_a = uni(rng);
  g.sigma_b = uni(rng);
  double ya = normal(rng) < 0 ? -1.0 : 1.0;
  double yb = normal(rng) < 0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    g.mu_a.push_back(normal(rng) / std::sqrt(static_cast<double>(dim)));
    g.mu_b.push_back(normal(rng) / std::sqrt(static_cast<double>(dim)));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    g.f_a.push_back(ya * g.mu_a[i] + g.sigma_a * normal(rng));
    g.f_b.push_back(yb * g.mu_b[i] + g.sigma_b * normal(rng));
  }
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> negated(std::vector<double> v) {
  for (double& x : v) x = -x;
  return v;
}

double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

std::vector<OracleCheckRow> run_oracle_checks(const OracleCheckOptions& options) {
  if (options.seeds < 1) throw ConfigError("oracle-check: seeds must be positive");
  if (options.gap_draws < 2) throw ConfigError("oracle-check: gap_draws must be at least 2");

  Tally enumeration("bayes_posterior_vs_enumeration", 1e-10);
  Tally extreme_one("bayes_logit_m1_weights", 1e-12);
  Tally extreme_half("bayes_logit_m05_weights", 1e-12);
  Tally flip("bayes_label_flip_symmetry", 1e-12);
  Tally invariance("bayes_m05_invariant_to_f_b", 0.0);
  Tally under("underparam_vs_pinv", 1e-8);
  Tally over("overparam_vs_min_norm", 1e-8);
  Tally noiseless("underparam_noiseless_zero", 1e-10);
  Tally gap("gap_l_s_at_least_l_c", 0.0);
  Tally gap_zero("gap_noiseless_zero", 1e-20);

  for (int k = 0; k < options.seeds; ++k) {
    std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(k);
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);

    for (int step = 1; step <= 9; ++step) {
      double m = 0.1 * step;
      GaussianPair g = draw_pair(rng, 3);
      BayesParams p = BayesParams::from_gaussian(g.mu_a, g.sigma_a, g.mu_b, g.sigma_b, m);
      double closed = bayes_posterior(g.f_a, g.f_b, p);
      double enumerated =
          bayes_posterior_enumerated(g.f_a, g.f_b, g.mu_a, g.sigma_a, g.mu_b, g.sigma_b, m);
      enumeration.add(std::abs(closed - enumerated));
      flip.add(std::abs(closed + bayes_posterior(negated(g.f_a), negated(g.f_b), p) - 1.0));
    }

    GaussianPair g = draw_pair(rng, 3);
    BayesParams p1 = BayesParams::from_gaussian(g.mu_a, g.sigma_a, g.mu_b, g.sigma_b, 1.0);
    BayesWeights w1 = bayes_weight_extremes(p1);
    extreme_one.add(std::abs(bayes_logit(g.f_a, g.f_b, p1) - (dot(w1.w_a, g.f_a) + dot(w1.w_b, g.f_b))));
    BayesParams ph = BayesParams::from_gaussian(g.mu_a, g.sigma_a, g.mu_b, g.sigma_b, 0.5);
    BayesWeights wh = bayes_weight_extremes(ph);
    extreme_half.add(std::abs(bayes_logit(g.f_a, g.f_b, ph) - (dot(wh.w_a, g.f_a) + dot(wh.w_b, g.f_b))));
    GaussianPair other = draw_pair(rng, 3);
    invariance.add(std::abs(bayes_posterior(g.f_a, g.f_b, ph) - bayes_posterior(g.f_a, other.f_b, ph)));

    LinearRegProblem u = random_linear_problem(50, 5, 1.0, seed);
    under.add(rel_error(underparam_spurious_weight(u), least_squares_solution(u.design(), u.targets())(5)));
    LinearRegProblem o = random_linear_problem(10, 50, 1.0, seed);
    over.add(rel_error(overparam_spurious_weight(o), min_norm_solution(o.design(), o.targets())(50)));
    LinearRegProblem z = random_linear_problem(50, 5, 0.0, seed);
    noiseless.add(std::abs(underparam_spurious_weight(z)));

    GapSpec spec;
    spec.n = 30;
    spec.d = 5;
    spec.sigma = 1.0;
    spec.n_test = 500;
    spec.draws = options.gap_draws;
    spec.seed = seed;
    GapResult r = generalization_gap(spec);
    // Violation beyond three paired standard errors.
    gap.add(std::max(0.0, (r.l_c - r.l_s) - 3.0 * r.gap_stderr));
    spec.sigma = 0.0;
    spec.draws = 2;
    GapResult r0 = generalization_gap(spec);
    gap_zero.add(std::max(r0.l_s, r0.l_c));
  }

  return {enumeration.row, extreme_one.row, extreme_half.row, flip.row, invariance.row,
          under.row,       over.row,        noiseless.row,    gap.row,  gap_zero.row};
}

bool all_passed(const std::vector<OracleCheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const OracleCheckRow& r) { return r.pass(); });
}

std::string oracle_check_csv(const std::vector<OracleCheckRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << "check,cases,failures,max_error,tolerance,pass\n";
  for (const auto& r : rows) {
    out << r.check << ',' << r.cases << ',' << r.failures << ',' << std::scientific << r.max_error
        << ',' << r.tolerance << std::defaultfloat << ',' << (r.pass() ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace mtcrl
