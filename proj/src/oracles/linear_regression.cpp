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

#include "oracles/linear_regression.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.hpp"

namespace mtcrl {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

void check_shapes(const LinearRegProblem& p) {
  if (p.s.size() != p.rows() || p.noise.size() != p.rows() || p.theta_c.size() != p.dim()) {
    throw ShapeError("linear regression: inconsistent problem dimensions");
  }
}

// Relative threshold below which a quadratic form counts as zero.
constexpr double kRankTol = 1e-10;

}  // namespace

Eigen::VectorXd LinearRegProblem::targets() const { return c * theta_c + noise; }

Eigen::MatrixXd LinearRegProblem::design() const {
  Eigen::MatrixXd x(rows(), dim() + 1);
  x << c, s;
  return x;
}

LinearRegProblem random_linear_problem(Eigen::Index n, Eigen::Index d, double sigma,
                                       std::uint64_t seed) {
  if (n < 1 || d < 1) throw DomainError("linear regression: n and d must be positive");
  if (!(sigma >= 0)) throw DomainError("linear regression: sigma must be non-negative");
  std::mt19937_64 rng(seed);
  LinearRegProblem p;
  p.c = gaussian_matrix(n, d, rng);
  p.s = gaussian_matrix(n, 1, rng).col(0);
  p.theta_c = gaussian_matrix(d, 1, rng).col(0);
  p.noise = sigma * gaussian_matrix(n, 1, rng).col(0);
  return p;
}

double underparam_spurious_weight(const LinearRegProblem& problem) {
  check_shapes(problem);
  if (problem.dim() + 1 > problem.rows()) {
    throw DomainError("underparam: requires d + 1 <= n");
  }
  const Eigen::MatrixXd& c = problem.c;
  Eigen::LDLT<Eigen::MatrixXd> gram(c.transpose() * c);
  if (gram.info() != Eigen::Success || gram.rcond() < 1e-14) {
    throw DegenerateError("underparam: C is not of full column rank");
  }
  // (I - P) S without forming P.
  Eigen::VectorXd resid = problem.s - c * gram.solve(c.transpose() * problem.s);
  double denom = problem.s.dot(resid);
  if (!(std::abs(denom) > kRankTol * problem.s.squaredNorm())) {
    throw DegenerateError("underparam: S lies in the column space of C");
  }
  return resid.dot(problem.targets()) / denom;
}

double overparam_spurious_weight(const LinearRegProblem& problem) {
  check_shapes(problem);
  if (problem.dim() <= problem.rows()) {
    throw DomainError("overparam: requires d > n");
  }
  Eigen::LDLT<Eigen::MatrixXd> outer(problem.c * problem.c.transpose());
  if (outer.info() != Eigen::Success || outer.rcond() < 1e-14) {
    throw DegenerateError("overparam: C C^T is singular");
  }
  Eigen::VectorXd gs = outer.solve(problem.s);
  return gs.dot(problem.targets()) / (1.0 + problem.s.dot(gs));
}

Eigen::VectorXd least_squares_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ShapeError("least squares: row count mismatch");
  return x.completeOrthogonalDecomposition().pseudoInverse() * y;
}

Eigen::VectorXd min_norm_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ShapeError("min norm: row count mismatch");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(x * x.transpose());
  if (!lu.isInvertible()) throw DegenerateError("min norm: X X^T is singular");
  return x.transpose() * lu.solve(y);
}

void GapSpec::validate() const {
  if (n < d + 2) throw DomainError("generalization gap: requires d + 1 < n");
  if (d < 1 || n_test < 1 || draws < 1) throw DomainError("generalization gap: sizes must be positive");
  if (!(sigma >= 0)) throw DomainError("generalization gap: sigma must be non-negative");
  if (!(rho >= -1 && rho <= 1)) throw DomainError("generalization gap: rho must lie in [-1, 1]");
}

GapResult generalization_gap(const GapSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Eigen::VectorXd theta = gaussian_matrix(spec.d, 1, rng).col(0);
  Eigen::VectorXd dir = theta / theta.norm();
  double side = std::sqrt(1.0 - spec.rho * spec.rho);
  auto draw_rows = [&](Eigen::Index rows) {
    Eigen::MatrixXd x(rows, spec.d + 1);
    x.leftCols(spec.d) = gaussian_matrix(rows, spec.d, rng);
    Eigen::VectorXd z = gaussian_matrix(rows, 1, rng).col(0);
    x.col(spec.d) = spec.rho * (x.leftCols(spec.d) * dir) + side * z;
    return x;
  };

  double sum_s = 0, sum_c = 0, sq_s = 0, sq_c = 0, sq_g = 0;
  for (int k = 0; k < spec.draws; ++k) {
    Eigen::MatrixXd x = draw_rows(spec.n);
    Eigen::VectorXd y =
        x.leftCols(spec.d) * theta + spec.sigma * gaussian_matrix(spec.n, 1, rng).col(0);
    Eigen::VectorXd with_s = least_squares_solution(x, y);
    Eigen::VectorXd without_s = Eigen::VectorXd::Zero(spec.d + 1);
    without_s.head(spec.d) = least_squares_solution(x.leftCols(spec.d), y);

    Eigen::VectorXd star = Eigen::VectorXd::Zero(spec.d + 1);
    star.head(spec.d) = theta;
    Eigen::MatrixXd test = draw_rows(spec.n_test);
    double ls = (test * (with_s - star)).squaredNorm() / static_cast<double>(spec.n_test);
    double lc = (test * (without_s - star)).squaredNorm() / static_cast<double>(spec.n_test);
    sum_s += ls;
    sum_c += lc;
    sq_s += ls * ls;
    sq_c += lc * lc;
    sq_g += (ls - lc) * (ls - lc);
  }
  double k = spec.draws;
  GapResult r;
  r.l_s = sum_s / k;
  r.l_c = sum_c / k;
  if (spec.draws > 1) {
    r.l_s_stderr = std::sqrt(std::max(0.0, sq_s / k - r.l_s * r.l_s) / (k - 1));
    r.l_c_stderr = std::sqrt(std::max(0.0, sq_c / k - r.l_c * r.l_c) / (k - 1));
    double g = r.l_s - r.l_c;
    r.gap_stderr = std::sqrt(std::max(0.0, sq_g / k - g * g) / (k - 1));
  }
  return r;
}

}  // namespace mtcrl
