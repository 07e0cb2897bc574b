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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "common/error.hpp"
#include "oracles/bayes.hpp"
#include "oracles/linear_regression.hpp"
#include "oracles/oracle_check.hpp"

namespace mtcrl {
namespace {

using Vec = std::vector<double>;

// Joint density summed over the four labelings, in linear space.
double enumerate_posterior(const Vec& fa, const Vec& fb, const Vec& mua, double sa,
                           const Vec& mub, double sb, double m) {
  auto density = [](const Vec& f, const Vec& mu, double y, double s) {
    double p = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double z = (f[i] - y * mu[i]) / s;
      p *= std::exp(-0.5 * z * z) / (s * std::sqrt(2 * std::numbers::pi));
    }
    return p;
  };
  double num = 0, den = 0;
  for (double ya : {-1.0, 1.0}) {
    for (double yb : {-1.0, 1.0}) {
      double joint = 0.5 * (ya == yb ? m : 1 - m) * density(fa, mua, ya, sa) * density(fb, mub, yb, sb);
      den += joint;
      if (ya > 0) num += joint;
    }
  }
  return num / den;
}

Vec normal_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (double& x : v) x = d(rng);
  return v;
}

TEST(Bayes, ZeroFactorsGiveOneHalf) {
  Vec zero(4, 0.0), mu{1, -2, 0.5, 3};
  for (double m : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    BayesParams p = BayesParams::from_gaussian(mu, 1.3, mu, 0.7, m);
    EXPECT_DOUBLE_EQ(bayes_posterior(zero, zero, p), 0.5);
  }
}

TEST(Bayes, MatchesLinearSpaceEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    for (double m : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      Vec mua = normal_vec(rng, 3, 0.6), mub = normal_vec(rng, 3, 0.6);
      Vec fa = normal_vec(rng, 3), fb = normal_vec(rng, 3);
      double sa = 0.8 + 0.1 * (trial % 5), sb = 1.2 - 0.05 * (trial % 7);
      BayesParams p = BayesParams::from_gaussian(mua, sa, mub, sb, m);
      double want = enumerate_posterior(fa, fb, mua, sa, mub, sb, m);
      EXPECT_NEAR(bayes_posterior(fa, fb, p), want, 1e-10);
      EXPECT_NEAR(bayes_posterior_enumerated(fa, fb, mua, sa, mub, sb, m), want, 1e-10);
    }
  }
}

TEST(Bayes, EightTenthsExample) {
  Vec mua{0.4, -0.3}, mub{0.2, 0.5}, fa{0.7, 0.1}, fb{-0.2, 1.1};
  BayesParams p = BayesParams::from_gaussian(mua, 1.0, mub, 1.5, 0.8);
  EXPECT_NEAR(bayes_posterior(fa, fb, p), enumerate_posterior(fa, fb, mua, 1.0, mub, 1.5, 0.8), 1e-12);
}

TEST(Bayes, ExtremeWeights) {
  std::mt19937_64 rng(5);
  Vec mua = normal_vec(rng, 4), mub = normal_vec(rng, 4);
  BayesParams one = BayesParams::from_gaussian(mua, 1.1, mub, 0.9, 1.0);
  BayesWeights w1 = bayes_weight_extremes(one);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(w1.w_a[i], 2 * one.beta_a[i]);
    EXPECT_DOUBLE_EQ(w1.w_b[i], 2 * one.beta_b[i]);
  }
  BayesParams half = one;
  half.m_c = 0.5;
  BayesWeights wh = bayes_weight_extremes(half);
  for (double v : wh.w_b) EXPECT_EQ(v, 0.0);

  for (int trial = 0; trial < 200; ++trial) {
    Vec fa = normal_vec(rng, 4), fb = normal_vec(rng, 4);
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      sa += fa[i] * one.beta_a[i];
      sb += fb[i] * one.beta_b[i];
    }
    EXPECT_NEAR(bayes_logit(fa, fb, one), 2 * sa + 2 * sb, 1e-12);
    EXPECT_NEAR(bayes_logit(fa, fb, half), 2 * sa, 1e-12);
  }
}

TEST(Bayes, ExtremeWeightsRejectInteriorConfounder) {
  BayesParams p{{1.0}, {1.0}, 0.7};
  EXPECT_THROW(bayes_weight_extremes(p), DomainError);
}

TEST(Bayes, HalfConfounderIgnoresSecondFactor) {
  std::mt19937_64 rng(8);
  Vec mua = normal_vec(rng, 3), mub = normal_vec(rng, 3);
  BayesParams p = BayesParams::from_gaussian(mua, 1.0, mub, 1.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    Vec fa = normal_vec(rng, 3), fb = normal_vec(rng, 3, 5.0), fb2 = normal_vec(rng, 3, 5.0);
    EXPECT_EQ(bayes_posterior(fa, fb, p), bayes_posterior(fa, fb2, p));
    Vec flipped = fb;
    for (double& x : flipped) x = -x;
    EXPECT_EQ(bayes_posterior(fa, fb, p), bayes_posterior(fa, flipped, p));
  }
}

TEST(Bayes, LabelFlipSymmetry) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Vec mua = normal_vec(rng, 2), mub = normal_vec(rng, 2);
    Vec fa = normal_vec(rng, 2), fb = normal_vec(rng, 2);
    BayesParams p = BayesParams::from_gaussian(mua, 1.0, mub, 1.0, 0.1 * (trial % 11));
    Vec nfa = fa, nfb = fb;
    for (double& x : nfa) x = -x;
    for (double& x : nfb) x = -x;
    EXPECT_NEAR(bayes_posterior(fa, fb, p) + bayes_posterior(nfa, nfb, p), 1.0, 1e-12);
  }
}

TEST(Bayes, MonotoneAlongCausalMean) {
  Vec mua{0.6, -0.8}, mub{1.0, 0.0}, fb{0.3, -0.4};
  BayesParams p = BayesParams::from_gaussian(mua, 1.0, mub, 1.0, 0.9);
  double prev = 0.0;
  for (int k = -20; k <= 20; ++k) {
    Vec fa{0.1 + 0.2 * k * mua[0], -0.2 + 0.2 * k * mua[1]};
    double cur = bayes_posterior(fa, fb, p);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(Bayes, StableForLargeFactors) {
  BayesParams p{{1.0}, {1.0}, 0.9};
  // The second factor's pull saturates at log(m / (1 - m)).
  EXPECT_NEAR(bayes_logit(Vec{0.0}, Vec{900.0}, p), std::log(9.0), 1e-12);
  EXPECT_NEAR(bayes_posterior(Vec{0.0}, Vec{900.0}, p), 0.9, 1e-12);
  EXPECT_NEAR(bayes_logit(Vec{800.0}, Vec{-900.0}, p), 1600.0 - std::log(9.0), 1e-9);
  EXPECT_EQ(bayes_posterior(Vec{-800.0}, Vec{0.0}, p), 0.0);
}

TEST(Bayes, ValidatesInputs) {
  EXPECT_THROW(BayesParams::from_gaussian(Vec{1}, 0.0, Vec{1}, 1.0, 0.5), DomainError);
  BayesParams bad{{1.0}, {1.0}, 1.5};
  EXPECT_THROW(bayes_posterior(Vec{0.0}, Vec{0.0}, bad), DomainError);
  BayesParams p{{1.0, 2.0}, {1.0}, 0.5};
  EXPECT_THROW(bayes_posterior(Vec{0.0}, Vec{0.0}, p), ShapeError);
}

// Least squares via SVD, independent of the library's decomposition.
Eigen::VectorXd svd_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
}

TEST(LinearRegression, UnderparamMatchesPinvOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LinearRegProblem p = random_linear_problem(50, 5, 0.7, seed);
    double want = svd_solve(p.design(), p.targets())(5);
    EXPECT_NEAR(underparam_spurious_weight(p), want, 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST(LinearRegression, OverparamMatchesMinNormOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LinearRegProblem p = random_linear_problem(10, 50, 0.7, seed);
    // Min-norm interpolant from the SVD, which is also min-norm for wide X.
    double want = svd_solve(p.design(), p.targets())(50);
    EXPECT_NEAR(overparam_spurious_weight(p), want, 1e-8 * std::max(1.0, std::abs(want)));
    Eigen::VectorXd mn = min_norm_solution(p.design(), p.targets());
    EXPECT_LT((p.design() * mn - p.targets()).norm(), 1e-8);
  }
}

TEST(LinearRegression, NoiselessRecoversZero) {
  LinearRegProblem p = random_linear_problem(40, 6, 0.0, 3);
  EXPECT_NEAR(underparam_spurious_weight(p), 0.0, 1e-12);
}

TEST(LinearRegression, OrthogonalSpuriousColumn) {
  LinearRegProblem p = random_linear_problem(30, 4, 0.0, 4);
  // Make S orthogonal to col(C) and align the noise with S.
  Eigen::MatrixXd q = p.c.householderQr().householderQ() * Eigen::MatrixXd::Identity(30, 4);
  p.s -= q * (q.transpose() * p.s);
  p.noise = 0.37 * p.s;
  double want = p.noise.dot(p.s) / p.s.dot(p.s);
  EXPECT_NEAR(want, 0.37, 1e-12);
  EXPECT_NEAR(underparam_spurious_weight(p), want, 1e-10);
  EXPECT_NEAR(svd_solve(p.design(), p.targets())(4), want, 1e-10);
}

TEST(LinearRegression, SpuriousInColumnSpaceIsDegenerate) {
  LinearRegProblem p = random_linear_problem(20, 3, 0.5, 5);
  p.s = p.c * Eigen::Vector3d(1.0, -2.0, 0.5);
  EXPECT_THROW(underparam_spurious_weight(p), DegenerateError);
}

TEST(LinearRegression, OverparamZeroCases) {
  LinearRegProblem p = random_linear_problem(8, 30, 0.5, 6);
  LinearRegProblem zero_y = p;
  zero_y.theta_c.setZero();
  zero_y.noise.setZero();
  EXPECT_EQ(overparam_spurious_weight(zero_y), 0.0);
  LinearRegProblem zero_s = p;
  zero_s.s.setZero();
  EXPECT_EQ(overparam_spurious_weight(zero_s), 0.0);
}

TEST(LinearRegression, RegimePreconditions) {
  EXPECT_THROW(underparam_spurious_weight(random_linear_problem(5, 5, 1.0, 0)), DomainError);
  EXPECT_THROW(overparam_spurious_weight(random_linear_problem(5, 5, 1.0, 0)), DomainError);
  LinearRegProblem p = random_linear_problem(4, 10, 1.0, 0);
  p.c.row(1) = p.c.row(0);
  EXPECT_THROW(overparam_spurious_weight(p), DegenerateError);
}

TEST(GeneralizationGap, NoiselessIsExact) {
  GapSpec spec;
  spec.sigma = 0.0;
  spec.draws = 5;
  GapResult r = generalization_gap(spec);
  EXPECT_LT(r.l_s, 1e-20);
  EXPECT_LT(r.l_c, 1e-20);
}

TEST(GeneralizationGap, SpuriousColumnDoesNotHelp) {
  GapSpec spec;
  spec.n = 30;
  spec.d = 5;
  spec.draws = 200;
  spec.n_test = 1000;
  spec.seed = 17;
  GapResult r = generalization_gap(spec);
  EXPECT_GE(r.l_s - r.l_c, -3.0 * r.gap_stderr);
  EXPECT_GT(r.l_s, r.l_c);
  // OLS excess risk for Gaussian design: sigma^2 p / (n - p - 1).
  EXPECT_NEAR(r.l_c, 5.0 / 24.0, 5 * r.l_c_stderr);
  EXPECT_NEAR(r.l_s, 6.0 / 23.0, 5 * r.l_s_stderr);
}

TEST(GeneralizationGap, GapGrowsWithNoise) {
  double prev = -1.0;
  for (double sigma : {0.1, 0.5, 1.0}) {
    GapSpec spec;
    spec.n = 30;
    spec.d = 5;
    spec.sigma = sigma;
    spec.draws = 200;
    spec.n_test = 500;
    spec.seed = 23;
    GapResult r = generalization_gap(spec);
    EXPECT_GT(r.l_s - r.l_c, prev);
    prev = r.l_s - r.l_c;
  }
}

TEST(OracleCheck, AllChecksPass) {
  OracleCheckOptions options;
  options.seeds = 20;
  auto rows = run_oracle_checks(options);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass()) << r.check << " max_error " << r.max_error;
    EXPECT_GT(r.cases, 0);
  }
  EXPECT_TRUE(all_passed(rows));
  std::string csv = oracle_check_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "check,cases,failures,max_error,tolerance,pass");
}

TEST(OracleCheck, RejectsBadOptions) {
  OracleCheckOptions options;
  options.seeds = 0;
  EXPECT_THROW(run_oracle_checks(options), ConfigError);
}

}  // namespace
}  // namespace mtcrl
