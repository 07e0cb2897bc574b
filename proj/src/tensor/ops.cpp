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

#include "tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "common/error.hpp"

namespace mtcrl {

namespace {

using detail::make_result;
using detail::tape_of;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::shared_ptr<detail::TapeState> common_tape(const Tensor& a, const Tensor& b) {
  auto ta = tape_of(a);
  auto tb = tape_of(b);
  if (ta != tb) throw Error("operands were recorded on different tapes");
  return ta;
}

[[noreturn]] void shape_mismatch(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) +
                   " and " + shape_string(b));
}

// Strides of `in` viewed inside the broadcast shape `out` (0 on broadcast axes).
std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  for (std::size_t k = 0; k < in.size(); ++k) {
    std::size_t i = in.size() - 1 - k;
    std::size_t o = out.size() - 1 - k;
    strides[o] = in[i] == 1 ? 0 : stride;
    stride *= in[i];
  }
  return strides;
}

template <typename F>
Array binary_values(std::string_view op, const Array& a, const Array& b, F f) {
  if (a.shape() == b.shape()) {
    Array out(a.shape());
    auto x = a.values();
    auto y = b.values();
    auto z = out.values();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = f(x[i], y[i]);
    return out;
  }
  Shape shape;
  try {
    shape = broadcast_shapes(a.shape(), b.shape());
  } catch (const ShapeError&) {
    shape_mismatch(op, a.shape(), b.shape());
  }
  Array out(shape);
  auto z = out.values();
  if (b.numel() == 1 && a.numel() == z.size()) {
    double y = b[0];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = f(a[i], y);
    return out;
  }
  if (a.numel() == 1 && b.numel() == z.size()) {
    double x = a[0];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = f(x, b[i]);
    return out;
  }
  auto sa = broadcast_strides(a.shape(), shape);
  auto sb = broadcast_strides(b.shape(), shape);
  std::vector<std::size_t> idx(shape.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    z[n] = f(a[ia], b[ib]);
    for (std::size_t d = shape.size(); d-- > 0;) {
      ++idx[d];
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < shape[d]) break;
      ia -= sa[d] * shape[d];
      ib -= sb[d] * shape[d];
      idx[d] = 0;
    }
  }
  return out;
}

template <typename F>
Tensor unary(Op op, const Tensor& x, F f, OpAttrs attrs = {}) {
  auto tape = tape_of(x);
  Array out(x.shape());
  auto in = x.value().values();
  auto z = out.values();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = f(in[i]);
  return make_result(tape, op, std::move(attrs), {x}, std::move(out));
}

template <typename F>
Tensor binary(Op op, const Tensor& a, const Tensor& b, F f) {
  auto tape = common_tape(a, b);
  Array out = binary_values(op_name(op), a.value(), b.value(), f);
  return make_result(tape, op, {}, {a, b}, std::move(out));
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

void check_axis(std::string_view op, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for shape " + shape_string(shape));
  }
}

}  // namespace

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  Shape out(std::max(a.size(), b.size()), 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) shape_mismatch("broadcast", a, b);
    out[out.size() - 1 - k] = std::max(da, db);
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(Op::kAdd, a, b, [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(Op::kSub, a, b, [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(Op::kMul, a, b, [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(Op::kDiv, a, b, [](double x, double y) { return x / y; });
}

Tensor neg(const Tensor& x) {
  return unary(Op::kNeg, x, [](double v) { return -v; });
}

Tensor scale(const Tensor& x, double factor) {
  OpAttrs attrs;
  attrs.scalar = factor;
  return unary(Op::kScale, x, [factor](double v) { return v * factor; }, attrs);
}

Tensor add_scalar(const Tensor& x, double offset) {
  OpAttrs attrs;
  attrs.scalar = offset;
  return unary(Op::kAddScalar, x, [offset](double v) { return v + offset; }, attrs);
}

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  auto tape = common_tape(a, b);
  if (a.rank() != 2 || b.rank() != 2) shape_mismatch("matmul", a.shape(), b.shape());
  const Array& av = a.value();
  const Array& bv = b.value();
  std::size_t m = trans_a ? av.cols() : av.rows();
  std::size_t ka = trans_a ? av.rows() : av.cols();
  std::size_t kb = trans_b ? bv.cols() : bv.rows();
  std::size_t n = trans_b ? bv.rows() : bv.cols();
  if (ka != kb) shape_mismatch("matmul", a.shape(), b.shape());
  Array out(Shape{m, n});
  Eigen::Map<const RowMajor> A(av.values().data(), av.rows(), av.cols());
  Eigen::Map<const RowMajor> B(bv.values().data(), bv.rows(), bv.cols());
  Eigen::Map<RowMajor> C(out.values().data(), m, n);
  if (!trans_a && !trans_b) {
    C.noalias() = A * B;
  } else if (trans_a && !trans_b) {
    C.noalias() = A.transpose() * B;
  } else if (!trans_a && trans_b) {
    C.noalias() = A * B.transpose();
  } else {
    C.noalias() = A.transpose() * B.transpose();
  }
  OpAttrs attrs;
  attrs.trans_a = trans_a;
  attrs.trans_b = trans_b;
  return make_result(tape, Op::kMatMul, std::move(attrs), {a, b}, std::move(out));
}

Tensor transpose(const Tensor& x) {
  auto tape = tape_of(x);
  if (x.rank() != 2) throw ShapeError("transpose: needs rank 2, got " + shape_string(x.shape()));
  const Array& v = x.value();
  Array out(Shape{v.cols(), v.rows()});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) out.at(c, r) = v.at(r, c);
  }
  return make_result(tape, Op::kTranspose, {}, {x}, std::move(out));
}

Tensor reshape(const Tensor& x, Shape shape) {
  auto tape = tape_of(x);
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_string(x.shape()) + " as " +
                     shape_string(shape));
  }
  OpAttrs attrs;
  attrs.shape = x.shape();
  return make_result(tape, Op::kReshape, std::move(attrs), {x},
                     x.value().reshaped(std::move(shape)));
}

Tensor broadcast_to(const Tensor& x, Shape shape) {
  auto tape = tape_of(x);
  if (broadcast_shapes(x.shape(), shape) != shape) {
    shape_mismatch("broadcast_to", x.shape(), shape);
  }
  Array zero(shape);
  Array out = binary_values("broadcast_to", x.value(), zero,
                            [](double v, double) { return v; });
  OpAttrs attrs;
  attrs.shape = x.shape();
  return make_result(tape, Op::kBroadcastTo, std::move(attrs), {x}, std::move(out));
}

Tensor sigmoid(const Tensor& x) {
  return unary(Op::kSigmoid, x, [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Tensor tanh(const Tensor& x) {
  return unary(Op::kTanh, x, [](double v) { return std::tanh(v); });
}

Tensor relu(const Tensor& x) {
  return unary(Op::kRelu, x, [](double v) { return v > 0 ? v : 0.0; });
}

Tensor exp(const Tensor& x) {
  return unary(Op::kExp, x, [](double v) { return std::exp(v); });
}

Tensor log(const Tensor& x) {
  for (double v : x.value().values()) {
    if (!(v > 0)) {
      throw DomainError("log: argument must be positive, got " + std::to_string(v));
    }
  }
  return unary(Op::kLog, x, [](double v) { return std::log(v); });
}

Tensor sqrt(const Tensor& x) {
  for (double v : x.value().values()) {
    if (v < 0) throw DomainError("sqrt: argument must be non-negative, got " + std::to_string(v));
  }
  return unary(Op::kSqrt, x, [](double v) { return std::sqrt(v); });
}

Tensor square(const Tensor& x) {
  return unary(Op::kSquare, x, [](double v) { return v * v; });
}

Tensor abs(const Tensor& x) {
  return unary(Op::kAbs, x, [](double v) { return std::fabs(v); });
}

Tensor sum(const Tensor& x) {
  auto tape = tape_of(x);
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  OpAttrs attrs;
  attrs.shape = x.shape();
  return make_result(tape, Op::kSum, std::move(attrs), {x}, Array::scalar(total));
}

Tensor sum(const Tensor& x, std::size_t axis) {
  auto tape = tape_of(x);
  check_axis("sum", x.shape(), axis);
  AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = 1;
  Array out(shape);
  auto in = x.value().values();
  auto z = out.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t k = 0; k < s.extent; ++k) {
      const double* row = in.data() + (o * s.extent + k) * s.inner;
      double* dst = z.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += row[i];
    }
  }
  OpAttrs attrs;
  attrs.axis = axis;
  attrs.shape = x.shape();
  return make_result(tape, Op::kSumAxis, std::move(attrs), {x}, std::move(out));
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mean(const Tensor& x, std::size_t axis) {
  check_axis("mean", x.shape(), axis);
  return scale(sum(x, axis), 1.0 / static_cast<double>(x.shape()[axis]));
}

namespace {

Array softmax_rows(const Array& logits) {
  std::size_t rows = logits.rows(), cols = logits.cols();
  Array out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = logits.values().data() + r * cols;
    double* z = out.values().data() + r * cols;
    double m = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      z[c] = std::exp(in[c] - m);
      total += z[c];
    }
    for (std::size_t c = 0; c < cols; ++c) z[c] /= total;
  }
  return out;
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  auto tape = tape_of(logits);
  if (logits.rank() != 2) {
    throw ShapeError("softmax: needs rank 2, got " + shape_string(logits.shape()));
  }
  return make_result(tape, Op::kSoftmax, {}, {logits}, softmax_rows(logits.value()));
}

Tensor softmax_cross_entropy(const Tensor& logits,
                             std::span<const std::size_t> labels) {
  auto tape = tape_of(logits);
  if (logits.rank() != 2) {
    throw ShapeError("softmax_cross_entropy: logits need rank 2, got " +
                     shape_string(logits.shape()));
  }
  const Array& v = logits.value();
  std::size_t rows = v.rows(), cols = v.cols();
  if (labels.size() != rows) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits of shape " + shape_string(v.shape()));
  }
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= cols) {
      throw ShapeError("softmax_cross_entropy: label " + std::to_string(labels[r]) +
                       " out of range for " + std::to_string(cols) + " classes");
    }
    const double* in = v.values().data() + r * cols;
    double m = *std::max_element(in, in + cols);
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += std::exp(in[c] - m);
    total += m + std::log(acc) - in[labels[r]];
  }
  OpAttrs attrs;
  attrs.labels.assign(labels.begin(), labels.end());
  return make_result(tape, Op::kSoftmaxCrossEntropy, std::move(attrs), {logits},
                     Array::scalar(total / static_cast<double>(rows)));
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  auto tape = tape_of(parts[0]);
  const Shape& first = parts[0].shape();
  check_axis("concat", first, axis);
  Shape shape = first;
  shape[axis] = 0;
  for (const auto& p : parts) {
    if (tape_of(p) != tape) throw Error("operands were recorded on different tapes");
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) shape_mismatch("concat", first, s);
    shape[axis] += s[axis];
  }
  Array out(shape);
  AxisSplit total = split_at(shape, axis);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    AxisSplit s = split_at(p.shape(), axis);
    auto in = p.value().values();
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(in.data() + o * s.extent * s.inner, s.extent * s.inner,
                  out.values().data() + (o * total.extent + offset) * total.inner);
    }
    offset += s.extent;
  }
  OpAttrs attrs;
  attrs.axis = axis;
  return make_result(tape, Op::kConcat, std::move(attrs),
                     std::vector<Tensor>(parts.begin(), parts.end()), std::move(out));
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  auto tape = tape_of(x);
  check_axis("slice", x.shape(), axis);
  if (begin >= end || end > x.shape()[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for axis " + std::to_string(axis) + " of shape " +
                     shape_string(x.shape()));
  }
  AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = end - begin;
  Array out(shape);
  std::size_t len = (end - begin) * s.inner;
  auto in = x.value().values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.data() + (o * s.extent + begin) * s.inner, len,
                out.values().data() + o * len);
  }
  OpAttrs attrs;
  attrs.axis = axis;
  attrs.begin = begin;
  attrs.end = end;
  attrs.shape = x.shape();
  return make_result(tape, Op::kSlice, std::move(attrs), {x}, std::move(out));
}

Tensor pad(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t length) {
  auto tape = tape_of(x);
  check_axis("pad", x.shape(), axis);
  std::size_t extent = x.shape()[axis];
  if (begin + extent > length) {
    throw ShapeError("pad: extent " + std::to_string(extent) + " at offset " +
                     std::to_string(begin) + " exceeds length " + std::to_string(length));
  }
  AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = length;
  Array out(shape);
  auto in = x.value().values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.data() + o * extent * s.inner, extent * s.inner,
                out.values().data() + (o * length + begin) * s.inner);
  }
  OpAttrs attrs;
  attrs.axis = axis;
  attrs.begin = begin;
  attrs.end = begin + extent;
  return make_result(tape, Op::kPad, std::move(attrs), {x}, std::move(out));
}

Tensor l1_norm(const Tensor& x) {
  auto tape = tape_of(x);
  double total = 0.0;
  for (double v : x.value().values()) total += std::fabs(v);
  return make_result(tape, Op::kL1Norm, {}, {x}, Array::scalar(total));
}

Tensor l2_norm_squared(const Tensor& x) {
  auto tape = tape_of(x);
  double total = 0.0;
  for (double v : x.value().values()) total += v * v;
  return make_result(tape, Op::kL2NormSquared, {}, {x}, Array::scalar(total));
}

Tensor constant_like(const Tensor& like, Array value) {
  auto tape = tape_of(like);
  auto node = std::make_shared<detail::Node>();
  node->id = tape->next_id++;
  node->op = Op::kConstant;
  node->value = std::move(value);
  node->generation = tape->generation;
  node->tape = tape;
  return Tensor(std::move(node));
}

Tensor zeros_like(const Tensor& like) { return constant_like(like, Array(like.shape(), 0.0)); }

Tensor ones_like(const Tensor& like) { return constant_like(like, Array(like.shape(), 1.0)); }

Tensor reduce_to(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  Tensor out = x;
  std::size_t lead = out.rank() - shape.size();
  for (std::size_t i = 0; i < out.rank(); ++i) {
    bool collapse = i < lead ? out.shape()[i] > 1
                             : shape[i - lead] == 1 && out.shape()[i] > 1;
    if (collapse) out = sum(out, i);
  }
  if (out.shape() != shape) out = reshape(out, shape);
  return out;
}

}  // namespace mtcrl
