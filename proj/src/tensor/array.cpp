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

#include "tensor/array.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "common/error.hpp"

namespace mtcrl {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_dims(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw ShapeError("array dimensions must be positive, got " +
                       shape_string(shape));
    }
  }
}

}  // namespace

Array::Array() : data_(1, 0.0) {}

Array::Array(Shape shape, double fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Array::Array(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_dims(shape_);
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("array of shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_numel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Array Array::scalar(double value) { return Array(Shape{}, {value}); }

Array Array::matrix(std::size_t rows, std::size_t cols,
                    std::vector<double> values) {
  return Array(Shape{rows, cols}, std::move(values));
}

Array Array::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> values;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Array(Shape{rows.size(), cols}, std::move(values));
}

Array Array::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Array(Shape{1, n}, std::move(values));
}

Array Array::column(std::vector<double> values) {
  std::size_t n = values.size();
  return Array(Shape{n, 1}, std::move(values));
}

Array Array::identity(std::size_t n) {
  Array out(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

std::size_t Array::rows() const {
  if (rank() != 2) throw ShapeError("rows() needs rank 2, got " + shape_string(shape_));
  return shape_[0];
}

std::size_t Array::cols() const {
  if (rank() != 2) throw ShapeError("cols() needs rank 2, got " + shape_string(shape_));
  return shape_[1];
}

double& Array::at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

double Array::at(std::size_t r, std::size_t c) const {
  return data_[r * shape_[1] + c];
}

double Array::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() needs a single element, shape is " +
                     shape_string(shape_));
  }
  return data_[0];
}

Array Array::reshaped(Shape shape) const {
  return Array(std::move(shape), data_);
}

bool Array::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mtcrl
