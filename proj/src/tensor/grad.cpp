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

#include "tensor/grad.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

Tensor sign_constant(const Tensor& like, const Tensor& x) {
  Array s(x.shape());
  auto in = x.value().values();
  for (std::size_t i = 0; i < in.size(); ++i) s[i] = in[i] > 0 ? 1.0 : (in[i] < 0 ? -1.0 : 0.0);
  return constant_like(like, std::move(s));
}

Tensor onehot_constant(const Tensor& like, const Shape& shape,
                       const std::vector<std::size_t>& labels) {
  Array h(shape);
  std::size_t cols = shape[1];
  for (std::size_t r = 0; r < labels.size(); ++r) h[r * cols + labels[r]] = 1.0;
  return constant_like(like, std::move(h));
}

// Gradient contributions to each parent of `node` given the upstream `g`.
std::vector<std::optional<Tensor>> backward(const NodePtr& node, const Tensor& g,
                                            const std::vector<bool>& want) {
  const auto& a = node->attrs;
  std::vector<Tensor> p;
  p.reserve(node->parents.size());
  for (const auto& parent : node->parents) p.emplace_back(parent);
  Tensor y(node);
  std::vector<std::optional<Tensor>> out(p.size());
  auto put = [&](std::size_t i, auto&& make) {
    if (want[i]) out[i] = make();
  };
  switch (node->op) {
    case Op::kAdd:
      put(0, [&] { return reduce_to(g, p[0].shape()); });
      put(1, [&] { return reduce_to(g, p[1].shape()); });
      break;
    case Op::kSub:
      put(0, [&] { return reduce_to(g, p[0].shape()); });
      put(1, [&] { return reduce_to(neg(g), p[1].shape()); });
      break;
    case Op::kMul:
      put(0, [&] { return reduce_to(g * p[1], p[0].shape()); });
      put(1, [&] { return reduce_to(g * p[0], p[1].shape()); });
      break;
    case Op::kDiv:
      put(0, [&] { return reduce_to(g / p[1], p[0].shape()); });
      put(1, [&] { return reduce_to(neg(g * y / p[1]), p[1].shape()); });
      break;
    case Op::kNeg:
      put(0, [&] { return neg(g); });
      break;
    case Op::kScale:
      put(0, [&] { return scale(g, a.scalar); });
      break;
    case Op::kAddScalar:
      put(0, [&] { return g; });
      break;
    case Op::kMatMul: {
      const Tensor& A = p[0];
      const Tensor& B = p[1];
      if (!a.trans_a && !a.trans_b) {
        put(0, [&] { return matmul(g, B, false, true); });
        put(1, [&] { return matmul(A, g, true, false); });
      } else if (a.trans_a && !a.trans_b) {
        put(0, [&] { return matmul(B, g, false, true); });
        put(1, [&] { return matmul(A, g); });
      } else if (!a.trans_a && a.trans_b) {
        put(0, [&] { return matmul(g, B); });
        put(1, [&] { return matmul(g, A, true, false); });
      } else {
        put(0, [&] { return matmul(B, g, true, true); });
        put(1, [&] { return matmul(g, A, true, true); });
      }
      break;
    }
    case Op::kTranspose:
      put(0, [&] { return transpose(g); });
      break;
    case Op::kReshape:
      put(0, [&] { return reshape(g, a.shape); });
      break;
    case Op::kBroadcastTo:
      put(0, [&] { return reduce_to(g, a.shape); });
      break;
    case Op::kSigmoid:
      put(0, [&] { return g * (y - square(y)); });
      break;
    case Op::kTanh:
      put(0, [&] { return g * add_scalar(neg(square(y)), 1.0); });
      break;
    case Op::kRelu:
      put(0, [&] {
        Array mask(p[0].shape());
        auto in = p[0].value().values();
        for (std::size_t i = 0; i < in.size(); ++i) mask[i] = in[i] > 0 ? 1.0 : 0.0;
        return g * constant_like(g, std::move(mask));
      });
      break;
    case Op::kExp:
      put(0, [&] { return g * y; });
      break;
    case Op::kLog:
      put(0, [&] { return g / p[0]; });
      break;
    case Op::kSqrt:
      put(0, [&] { return scale(g / y, 0.5); });
      break;
    case Op::kSquare:
      put(0, [&] { return scale(g * p[0], 2.0); });
      break;
    case Op::kAbs:
      put(0, [&] { return g * sign_constant(g, p[0]); });
      break;
    case Op::kSum:
    case Op::kSumAxis:
      put(0, [&] { return broadcast_to(g, a.shape); });
      break;
    case Op::kSoftmax:
      put(0, [&] { return y * (g - sum(g * y, 1)); });
      break;
    case Op::kSoftmaxCrossEntropy:
      put(0, [&] {
        double rows = static_cast<double>(p[0].shape()[0]);
        Tensor diff = softmax(p[0]) - onehot_constant(g, p[0].shape(), a.labels);
        return scale(g * diff, 1.0 / rows);
      });
      break;
    case Op::kConcat: {
      std::size_t offset = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        std::size_t extent = p[i].shape()[a.axis];
        put(i, [&] { return slice(g, a.axis, offset, offset + extent); });
        offset += extent;
      }
      break;
    }
    case Op::kSlice:
      put(0, [&] { return pad(g, a.axis, a.begin, a.shape[a.axis]); });
      break;
    case Op::kPad:
      put(0, [&] { return slice(g, a.axis, a.begin, a.end); });
      break;
    case Op::kL1Norm:
      put(0, [&] { return g * sign_constant(g, p[0]); });
      break;
    case Op::kL2NormSquared:
      put(0, [&] { return scale(g * p[0], 2.0); });
      break;
    case Op::kLeaf:
    case Op::kConstant:
      break;
  }
  return out;
}

}  // namespace

void GradMap::insert(NodeId id, Tensor grad) {
  if (grads_.emplace(id, std::move(grad)).second) order_.push_back(id);
}

const Tensor& GradMap::at(NodeId id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) throw Error("no gradient recorded for node " + std::to_string(id));
  return it->second;
}

GradMap grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph) {
  auto tape = detail::tape_of(output);
  if (output.numel() != 1) {
    throw ShapeError("grad: output must hold a single value, got shape " +
                     shape_string(output.shape()));
  }
  for (const auto& w : wrt) {
    if (detail::tape_of(w) != tape) throw Error("grad: tensor belongs to another tape");
  }

  // Reachable differentiable nodes, keyed by id so iteration is topological.
  std::map<NodeId, NodePtr> graph;
  std::vector<NodePtr> stack;
  if (output.node()->differentiable()) stack.push_back(output.node());
  while (!stack.empty()) {
    NodePtr n = stack.back();
    stack.pop_back();
    if (!graph.emplace(n->id, n).second) continue;
    for (const auto& parent : n->parents) {
      if (parent->differentiable() && !graph.count(parent->id)) stack.push_back(parent);
    }
  }

  // Nodes lying on a path to a requested tensor.
  std::map<NodeId, bool> leads;
  for (const auto& w : wrt) {
    if (graph.count(w.id())) leads[w.id()] = true;
  }
  for (const auto& [id, n] : graph) {
    if (leads.count(id)) continue;
    bool any = false;
    for (const auto& parent : n->parents) any = any || leads.count(parent->id) != 0;
    if (any) leads[id] = true;
  }

  std::optional<NoGradGuard> guard;
  if (!create_graph) guard.emplace(tape);

  std::map<NodeId, Tensor> grads;
  if (leads.count(output.id())) grads.emplace(output.id(), ones_like(output));
  for (auto it = graph.rbegin(); it != graph.rend(); ++it) {
    const NodePtr& n = it->second;
    auto g = grads.find(n->id);
    if (g == grads.end() || n->parents.empty()) continue;
    std::vector<bool> want(n->parents.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto& parent = n->parents[i];
      want[i] = parent->differentiable() && leads.count(parent->id) != 0;
    }
    auto contributions = backward(n, g->second, want);
    for (std::size_t i = 0; i < contributions.size(); ++i) {
      if (!contributions[i]) continue;
      NodeId pid = n->parents[i]->id;
      auto existing = grads.find(pid);
      if (existing == grads.end()) {
        grads.emplace(pid, std::move(*contributions[i]));
      } else {
        existing->second = existing->second + *contributions[i];
      }
    }
  }

  GradMap result;
  for (const auto& w : wrt) {
    auto g = grads.find(w.id());
    result.insert(w.id(), g != grads.end() ? g->second : zeros_like(w));
  }
  return result;
}

GradMap grad(const Tensor& output, std::initializer_list<Tensor> wrt, bool create_graph) {
  return grad(output, std::span<const Tensor>(wrt.begin(), wrt.size()), create_graph);
}

Tensor gradient_norm_penalty(const Tensor& f, std::span<const Tensor> inner) {
  GradMap g = grad(f, inner, true);
  Tensor total;
  for (NodeId id : g.ids()) {
    Tensor term = l2_norm_squared(g.at(id));
    total = total.defined() ? total + term : term;
  }
  if (!total.defined()) throw Error("gradient_norm_penalty: empty parameter set");
  return total;
}

}  // namespace mtcrl
