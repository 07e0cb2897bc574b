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

#include "tensor/tape.hpp"

// Differentiable operations. Binary elementwise ops broadcast with NumPy
// rules. Every op records a node when any operand requires gradients, and
// every backward rule is itself expressed with these ops, so gradients can
// be differentiated again.
namespace mtcrl {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);

// op(a) @ op(b) for rank-2 operands, op being an optional transpose.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false,
              bool trans_b = false);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, Shape shape);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
// Subgradient at 0 is 0.
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
// Throws DomainError for non-positive entries.
Tensor log(const Tensor& x);
// Throws DomainError for negative entries.
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);
Tensor abs(const Tensor& x);

// Sum of all entries, rank-0 result.
Tensor sum(const Tensor& x);
// Sum along one axis; the axis is kept with size 1.
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis);

// Row-wise softmax of a rank-2 tensor.
Tensor softmax(const Tensor& logits);
// Mean over rows of -log softmax(logits)[row, labels[row]].
Tensor softmax_cross_entropy(const Tensor& logits,
                             std::span<const std::size_t> labels);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end);
// Embeds x at [begin, begin + x.shape[axis]) of a zero tensor whose
// `axis` extent is `length`. Adjoint of slice.
Tensor pad(const Tensor& x, std::size_t axis, std::size_t begin,
           std::size_t length);

Tensor l1_norm(const Tensor& x);
Tensor l2_norm_squared(const Tensor& x);

// Constant on the tape of `like`.
Tensor constant_like(const Tensor& like, Array value);
Tensor zeros_like(const Tensor& like);
Tensor ones_like(const Tensor& like);

// Sums a broadcast result back down to `shape`.
Tensor reduce_to(const Tensor& x, const Shape& shape);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator*(double s, const Tensor& x) { return scale(x, s); }
inline Tensor operator*(const Tensor& x, double s) { return scale(x, s); }

Shape broadcast_shapes(const Shape& a, const Shape& b);

}  // namespace mtcrl
