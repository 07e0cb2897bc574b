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

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

namespace mtcrl {

// Linear regression Y = C theta_c + eps with an extra spurious column S in
// the design X = [C, S].
struct LinearRegProblem {
  Eigen::MatrixXd c;        // n x d
  Eigen::VectorXd s;        // n
  Eigen::VectorXd theta_c;  // d
  Eigen::VectorXd noise;    // n

  Eigen::Index rows() const { return c.rows(); }
  Eigen::Index dim() const { return c.cols(); }
  Eigen::VectorXd targets() const;
  Eigen::MatrixXd design() const;
};

// Gaussian problem: C, S, theta_c ~ N(0, 1) entries, eps ~ N(0, sigma^2).
LinearRegProblem random_linear_problem(Eigen::Index n, Eigen::Index d, double sigma,
                                       std::uint64_t seed);

// Closed form of the spurious coordinate for d + 1 <= n:
// S^T (I - P) Y / (S^T (I - P) S), P the orthogonal projector onto col(C).
double underparam_spurious_weight(const LinearRegProblem& problem);
// Closed form of the spurious coordinate of the min-norm interpolant for
// d > n: S^T G Y / (1 + S^T G S), G = (C C^T)^-1.
double overparam_spurious_weight(const LinearRegProblem& problem);

// Numerical counterparts: pinv(X) Y and X^T (X X^T)^-1 Y.
Eigen::VectorXd least_squares_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd min_norm_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Monte-Carlo generalization error of least squares with and without S.
// Rows are x = [c, s] with c ~ N(0, I_d) and
// s = rho (c . theta_c) / |theta_c| + sqrt(1 - rho^2) z, z ~ N(0, 1);
// the design is redrawn per noise draw and the error
// E_x[((theta_hat - theta_star) . x)^2] is estimated on n_test fresh rows.
struct GapSpec {
  Eigen::Index n = 50;
  Eigen::Index d = 5;
  double sigma = 1.0;
  double rho = 0.9;
  Eigen::Index n_test = 2000;
  int draws = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GapResult {
  double l_s = 0.0;
  double l_c = 0.0;
  double l_s_stderr = 0.0;
  double l_c_stderr = 0.0;
  // Standard error of the paired per-draw difference L_S - L_C.
  double gap_stderr = 0.0;
};

GapResult generalization_gap(const GapSpec& spec);

}  // namespace mtcrl
