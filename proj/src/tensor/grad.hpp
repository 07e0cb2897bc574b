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

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tensor/tape.hpp"

namespace mtcrl {

// Gradients keyed by the node id of each differentiated tensor.
class GradMap {
 public:
  void insert(NodeId id, Tensor grad);
  bool contains(NodeId id) const { return grads_.count(id) != 0; }
  bool contains(const Tensor& t) const { return contains(t.id()); }
  const Tensor& at(NodeId id) const;
  const Tensor& at(const Tensor& t) const { return at(t.id()); }
  std::size_t size() const noexcept { return order_.size(); }
  // Ids in the order they were requested.
  const std::vector<NodeId>& ids() const noexcept { return order_; }

 private:
  std::unordered_map<NodeId, Tensor> grads_;
  std::vector<NodeId> order_;
};

// Reverse-mode derivatives of a single-element `output` with respect to
// each tensor in `wrt`. Entries that do not influence the output, or that
// are detached, map to zero tensors. With `create_graph` the returned
// gradients are recorded on the tape and can be differentiated again.
GradMap grad(const Tensor& output, std::span<const Tensor> wrt,
             bool create_graph = false);
GradMap grad(const Tensor& output, std::initializer_list<Tensor> wrt,
             bool create_graph = false);

// Builds a scalar from parameters recorded on the given tape.
using ScalarFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

struct FiniteDiffOptions {
  double step = 1e-5;
  // 1 checks grad(f); 2 checks the gradient of ||grad(f, inner)||^2.
  int order = 1;
  // Parameter indices for the inner gradient when order == 2; empty means all.
  std::vector<std::size_t> inner;
  // Lower bound of the relative-error denominator.
  double floor = 1e-7;
};

struct FiniteDiffResult {
  double max_rel_error = 0.0;
  std::vector<Array> analytic;
  std::vector<Array> numeric;
};

// Compares autodiff against central differences (f(p+h) - f(p-h)) / 2h.
// Relative error per entry is |a - n| / max(|a|, |n|, floor).
FiniteDiffResult finite_diff_check(const ScalarFn& f, const std::vector<Array>& params,
                                   const FiniteDiffOptions& options = {});

// ||grad(f, inner)||^2 built with create_graph so it stays differentiable.
Tensor gradient_norm_penalty(const Tensor& f, std::span<const Tensor> inner);

}  // namespace mtcrl
