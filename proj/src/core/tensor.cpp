// Copyright 2026 The QAVA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qava/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "qava/errors.hpp"

namespace qava {

std::size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, DType dtype)
    : shape_(std::move(shape)), data_(NumElements(shape_), 0.0), dtype_(dtype) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ArgumentError("tensor dimensions must be positive: " + ShapeToString(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data, DType dtype)
    : shape_(std::move(shape)), data_(std::move(data)), dtype_(dtype) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ArgumentError("tensor dimensions must be positive: " + ShapeToString(shape_));
  }
  if (data_.size() != NumElements(shape_)) {
    throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + ShapeToString(shape_));
  }
  RoundToDType();
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

Tensor Tensor::FromList(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on tensor of shape " + ShapeToString(shape_));
  }
  return data_[0];
}

Tensor Tensor::As(DType dtype) const {
  Tensor out = *this;
  out.dtype_ = dtype;
  out.RoundToDType();
  return out;
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (NumElements(shape) != data_.size()) {
    throw ArgumentError("cannot reshape " + ShapeToString(shape_) + " to " + ShapeToString(shape));
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Tensor::Identical(const Tensor& other) const {
  return shape_ == other.shape_ && dtype_ == other.dtype_ &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
}

void Tensor::RoundToDType() {
  if (dtype_ == DType::kF32) {
    for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
  }
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ArgumentError("shape mismatch " + ShapeToString(a.shape()) + " vs " +
                        ShapeToString(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace qava
