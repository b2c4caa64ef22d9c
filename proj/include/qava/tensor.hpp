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

#ifndef QAVA_TENSOR_HPP_
#define QAVA_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qava {

enum class DType : std::uint8_t { kF32 = 1, kF64 = 2 };

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major tensor. Arithmetic always runs in double precision; the
// dtype tag controls storage precision (kF32 values are rounded to float on
// construction and persisted as 4-byte floats).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, DType dtype = DType::kF64);
  Tensor(Shape shape, std::vector<double> data, DType dtype = DType::kF64);

  static Tensor Scalar(double value);
  static Tensor Full(Shape shape, double value);
  static Tensor FromList(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  DType dtype() const { return dtype_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // 2-D element access; rows = dim(0), cols = dim(1).
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

  double item() const;

  // Same values with a different storage dtype (rounding to float for kF32).
  Tensor As(DType dtype) const;
  Tensor Reshaped(Shape shape) const;

  bool AllFinite() const;
  // Bitwise equality of shape, dtype and payload.
  bool Identical(const Tensor& other) const;

 private:
  void RoundToDType();

  Shape shape_;
  std::vector<double> data_;
  DType dtype_ = DType::kF64;
};

double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace qava

#endif  // QAVA_TENSOR_HPP_
