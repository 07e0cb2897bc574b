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

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

namespace {

std::vector<Tensor> record(Tape& tape, const std::vector<Array>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(tape.parameter(p));
  return out;
}

Tensor objective(const ScalarFn& f, Tape& tape, const std::vector<Tensor>& params,
                 const FiniteDiffOptions& options) {
  Tensor value = f(tape, params);
  if (options.order == 1) return value;
  std::vector<Tensor> inner;
  if (options.inner.empty()) {
    inner = params;
  } else {
    for (std::size_t i : options.inner) {
      if (i >= params.size()) throw Error("finite_diff_check: inner index out of range");
      inner.push_back(params[i]);
    }
  }
  return gradient_norm_penalty(value, inner);
}

double evaluate(const ScalarFn& f, const std::vector<Array>& params,
                const FiniteDiffOptions& options) {
  Tape tape;
  auto leaves = record(tape, params);
  double v = objective(f, tape, leaves, options).item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite function value");
  return v;
}

}  // namespace

FiniteDiffResult finite_diff_check(const ScalarFn& f, const std::vector<Array>& params,
                                   const FiniteDiffOptions& options) {
  if (!(options.step > 0)) throw DomainError("finite_diff_check: step must be positive");
  if (options.order != 1 && options.order != 2) {
    throw DomainError("finite_diff_check: order must be 1 or 2");
  }
  FiniteDiffResult result;
  {
    Tape tape;
    auto leaves = record(tape, params);
    Tensor value = objective(f, tape, leaves, options);
    if (!std::isfinite(value.item())) {
      throw NumericError("finite_diff_check: non-finite function value");
    }
    GradMap g = grad(value, leaves);
    for (const auto& leaf : leaves) result.analytic.push_back(g.at(leaf).value());
  }
  std::vector<Array> probe = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Array numeric(params[k].shape());
    for (std::size_t i = 0; i < params[k].numel(); ++i) {
      double base = params[k][i];
      probe[k][i] = base + options.step;
      double plus = evaluate(f, probe, options);
      probe[k][i] = base - options.step;
      double minus = evaluate(f, probe, options);
      probe[k][i] = base;
      numeric[i] = (plus - minus) / (2.0 * options.step);
      double a = result.analytic[k][i];
      double n = numeric[i];
      double denom = std::max({std::fabs(a), std::fabs(n), options.floor});
      result.max_rel_error = std::max(result.max_rel_error, std::fabs(a - n) / denom);
    }
    result.numeric.push_back(std::move(numeric));
  }
  return result;
}

}  // namespace mtcrl
