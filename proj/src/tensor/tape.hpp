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
#include <memory>
#include <string_view>
#include <vector>

#include "tensor/array.hpp"

namespace mtcrl {

using NodeId = std::uint64_t;

enum class Op : std::uint8_t {
  kLeaf,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kScale,
  kAddScalar,
  kMatMul,
  kTranspose,
  kReshape,
  kBroadcastTo,
  kSigmoid,
  kTanh,
  kRelu,
  kExp,
  kLog,
  kSqrt,
  kSquare,
  kAbs,
  kSum,
  kSumAxis,
  kSoftmax,
  kSoftmaxCrossEntropy,
  kConcat,
  kSlice,
  kPad,
  kL1Norm,
  kL2NormSquared,
};

std::string_view op_name(Op op);

// Operation parameters that are not tensors.
struct OpAttrs {
  std::size_t axis = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double scalar = 0.0;
  bool trans_a = false;
  bool trans_b = false;
  Shape shape;                      // source shape for reshape/broadcast/pad
  std::vector<std::size_t> labels;  // class index per row for cross-entropy
};

namespace detail {

struct TapeState;

struct Node {
  NodeId id = 0;
  Op op = Op::kConstant;
  OpAttrs attrs;
  std::vector<std::shared_ptr<Node>> parents;
  Array value;
  bool requires_grad = false;
  bool detached = false;
  std::uint64_t generation = 0;
  std::weak_ptr<TapeState> tape;

  bool differentiable() const noexcept { return requires_grad && !detached; }
};

struct TapeState {
  std::uint64_t generation = 0;
  NodeId next_id = 0;
  int no_grad_depth = 0;
  std::vector<std::shared_ptr<Node>> nodes;
};

}  // namespace detail

// Handle to a value recorded on a Tape. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const noexcept { return node_ != nullptr; }
  const Array& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }
  std::size_t rank() const { return value().rank(); }
  double item() const { return value().item(); }

  NodeId id() const;
  Op op() const;
  bool requires_grad() const;
  bool detached() const;
  // True while the recording tape has not been reset or destroyed.
  bool live() const;

  // A constant copy on the same tape; gradients never flow through it.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of operations. Node ids increase monotonically, so every
// parent precedes its children.
class Tape {
 public:
  Tape();

  // Trainable leaf.
  Tensor parameter(Array value);
  Tensor constant(Array value);
  // Leaf that participates in differentiation without being a parameter,
  // e.g. inputs for saliency maps.
  Tensor variable(Array value) { return parameter(std::move(value)); }

  // Invalidates every tensor recorded so far.
  void reset();

  // Stops gradient flow into `t` for subsequent grad() calls.
  void set_detached(const Tensor& t, bool detached = true);

  std::uint64_t generation() const noexcept;
  // Number of recorded (differentiable) nodes.
  std::size_t size() const noexcept;
  bool grad_enabled() const noexcept;

  struct NodeInfo {
    NodeId id;
    Op op;
    std::vector<NodeId> parents;
  };
  std::vector<NodeInfo> nodes() const;

  const std::shared_ptr<detail::TapeState>& state() const noexcept { return state_; }

 private:
  std::shared_ptr<detail::TapeState> state_;
};

// While alive, operations on `tape` produce constants with no history.
class NoGradGuard {
 public:
  explicit NoGradGuard(const Tape& tape);
  explicit NoGradGuard(std::shared_ptr<detail::TapeState> state);
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  std::shared_ptr<detail::TapeState> state_;
};

namespace detail {

std::shared_ptr<TapeState> tape_of(const Tensor& t);
// Creates the node for an operation result. Parents are kept only when
// the result requires gradients.
Tensor make_result(const std::shared_ptr<TapeState>& tape, Op op, OpAttrs attrs,
                   std::vector<Tensor> parents, Array value);

}  // namespace detail

}  // namespace mtcrl
