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

#include "tensor/tape.hpp"

#include <string>
#include <utility>

#include "common/error.hpp"

namespace mtcrl {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConstant: return "constant";
    case Op::kAdd: return "add";
    case Op::kSub: return "subtract";
    case Op::kMul: return "multiply";
    case Op::kDiv: return "divide";
    case Op::kNeg: return "negate";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kReshape: return "reshape";
    case Op::kBroadcastTo: return "broadcast_to";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kSquare: return "square";
    case Op::kAbs: return "abs";
    case Op::kSum: return "sum";
    case Op::kSumAxis: return "sum_axis";
    case Op::kSoftmax: return "softmax";
    case Op::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
    case Op::kConcat: return "concat";
    case Op::kSlice: return "slice";
    case Op::kPad: return "pad";
    case Op::kL1Norm: return "l1_norm";
    case Op::kL2NormSquared: return "l2_norm_squared";
  }
  return "unknown";
}

const Array& Tensor::value() const {
  if (!node_) throw Error("use of an undefined tensor");
  return node_->value;
}

NodeId Tensor::id() const {
  if (!node_) throw Error("use of an undefined tensor");
  return node_->id;
}

Op Tensor::op() const {
  if (!node_) throw Error("use of an undefined tensor");
  return node_->op;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::detached() const { return node_ && node_->detached; }

bool Tensor::live() const {
  if (!node_) return false;
  auto tape = node_->tape.lock();
  return tape && tape->generation == node_->generation;
}

Tensor Tensor::detach() const {
  auto tape = detail::tape_of(*this);
  auto node = std::make_shared<detail::Node>();
  node->id = tape->next_id++;
  node->op = Op::kConstant;
  node->value = value();
  node->generation = tape->generation;
  node->tape = tape;
  return Tensor(std::move(node));
}

Tape::Tape() : state_(std::make_shared<detail::TapeState>()) {}

namespace {

Tensor make_leaf(const std::shared_ptr<detail::TapeState>& state, Array value,
                 bool trainable) {
  if (!value.all_finite()) throw NumericError("non-finite value given to tape");
  auto node = std::make_shared<detail::Node>();
  node->id = state->next_id++;
  node->op = trainable ? Op::kLeaf : Op::kConstant;
  node->value = std::move(value);
  node->requires_grad = trainable;
  node->generation = state->generation;
  node->tape = state;
  if (trainable) state->nodes.push_back(node);
  return Tensor(std::move(node));
}

}  // namespace

Tensor Tape::parameter(Array value) { return make_leaf(state_, std::move(value), true); }

Tensor Tape::constant(Array value) { return make_leaf(state_, std::move(value), false); }

void Tape::reset() {
  state_->nodes.clear();
  ++state_->generation;
}

void Tape::set_detached(const Tensor& t, bool detached) {
  if (!t.defined()) throw Error("cannot detach an undefined tensor");
  if (detail::tape_of(t) != state_) throw Error("tensor belongs to another tape");
  t.node()->detached = detached;
}

std::uint64_t Tape::generation() const noexcept { return state_->generation; }

std::size_t Tape::size() const noexcept { return state_->nodes.size(); }

bool Tape::grad_enabled() const noexcept { return state_->no_grad_depth == 0; }

std::vector<Tape::NodeInfo> Tape::nodes() const {
  std::vector<NodeInfo> out;
  out.reserve(state_->nodes.size());
  for (const auto& n : state_->nodes) {
    NodeInfo info{n->id, n->op, {}};
    for (const auto& p : n->parents) info.parents.push_back(p->id);
    out.push_back(std::move(info));
  }
  return out;
}

NoGradGuard::NoGradGuard(const Tape& tape) : NoGradGuard(tape.state()) {}

NoGradGuard::NoGradGuard(std::shared_ptr<detail::TapeState> state)
    : state_(std::move(state)) {
  ++state_->no_grad_depth;
}

NoGradGuard::~NoGradGuard() { --state_->no_grad_depth; }

namespace detail {

std::shared_ptr<TapeState> tape_of(const Tensor& t) {
  if (!t.defined()) throw Error("use of an undefined tensor");
  auto tape = t.node()->tape.lock();
  if (!tape || tape->generation != t.node()->generation) {
    throw StaleTapeError("tensor belongs to a tape that has been reset");
  }
  return tape;
}

Tensor make_result(const std::shared_ptr<TapeState>& tape, Op op, OpAttrs attrs,
                   std::vector<Tensor> parents, Array value) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op_name(op)) + " produced a non-finite value");
  }
  auto node = std::make_shared<Node>();
  node->id = tape->next_id++;
  node->op = op;
  node->value = std::move(value);
  node->generation = tape->generation;
  node->tape = tape;
  bool needs = false;
  if (tape->no_grad_depth == 0) {
    for (const auto& p : parents) needs = needs || p.node()->differentiable();
  }
  node->requires_grad = needs;
  if (needs) {
    node->attrs = std::move(attrs);
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    tape->nodes.push_back(node);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

}  // namespace mtcrl
