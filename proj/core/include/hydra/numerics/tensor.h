// Copyright 2026 The Hydra Authors.
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

#ifndef HYDRA_NUMERICS_TENSOR_H_
#define HYDRA_NUMERICS_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hydra/error.h"

namespace hydra::numerics {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major tensor. Immutable by convention once handed to a Tape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(NumElements(shape_), T(0)) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    Require(NumElements(shape_) == data_.size(), ErrorCode::kInvalidArgument,
            "tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + ShapeString(shape_));
  }

  static Tensor Vector(std::vector<T> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<T> values) {
    return Tensor({rows, cols}, std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t ndim() const { return shape_.size(); }

  // Matrix view: the last dimension is the column count, everything before
  // it is folded into rows. A 1-D tensor is a single row.
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : size() / cols(); }

  std::span<const T> data() const { return data_; }
  std::span<T> mutable_data() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  bool operator==(const Tensor& other) const = default;

  template <typename U>
  Tensor<U> Cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

// A trainable tensor with its gradient accumulator. The accumulator is not
// part of the parameter's logical value, so recording tapes may add into it
// through a const reference.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  mutable Tensor<T> grad;
  bool requires_grad = true;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void ZeroGrad() const {
    for (T& g : grad.mutable_data()) g = T(0);
  }
};

// Boolean attention mask; blocked(i, j) == true removes key j from query i.
class AttentionMask {
 public:
  AttentionMask() = default;
  AttentionMask(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), blocked_(rows * cols, 0) {}

  static AttentionMask None(std::size_t rows, std::size_t cols) {
    return AttentionMask(rows, cols);
  }
  static AttentionMask Causal(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool blocked(std::size_t i, std::size_t j) const {
    return blocked_[i * cols_ + j] != 0;
  }
  void set_blocked(std::size_t i, std::size_t j, bool value) {
    blocked_[i * cols_ + j] = value ? 1 : 0;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> blocked_;
};

// Additive penalty applied to blocked attention scores.
inline constexpr double kMaskPenalty = -1e9;

}  // namespace hydra::numerics

#endif  // HYDRA_NUMERICS_TENSOR_H_
