// Copyright 2026 The attnhar Authors.
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

#ifndef ATTNHAR_TENSOR_H_
#define ATTNHAR_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attnhar {

// Dense row-major array of doubles with at most three axes. A default
// constructed tensor has rank 0 and no elements and is used as "absent".
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  static constexpr std::size_t kMaxRank = 3;

  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double *data() { return values_.data(); }
  const double *data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double &at(std::size_t i, std::size_t j) { return values_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const {
    return values_[i * shape_[1] + j];
  }
  double &at(std::size_t i, std::size_t j, std::size_t k) {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Contiguous slice along the leading axis.
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;

  // Same values under a new shape with equal element count.
  Tensor reshaped(Shape shape) const;
  void reshape(Shape shape);

  void fill(double value);
  Tensor zeros_like() const { return Tensor(shape_, 0.0); }

  std::string shape_string() const;

  friend bool operator==(const Tensor &a, const Tensor &b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  static void validate_shape(const Shape &shape);

  Shape shape_;
  std::vector<double> values_;
};

std::string shape_string(const Tensor::Shape &shape);

// Throws NumericError when any element is NaN or infinite.
void check_finite(const Tensor &t, std::string_view what);

enum class Transpose { kNo, kYes };

// Row-major general matrix multiply, C = alpha * op(A) * op(B) + beta * C.
// op(A) is m x k and op(B) is k x n; ld* are row strides in elements.
void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n,
          std::size_t k, double alpha, const double *a, std::size_t lda,
          const double *b, std::size_t ldb, double beta, double *c,
          std::size_t ldc);

Tensor matmul(const Tensor &a, const Tensor &b);
Tensor matmul(const Tensor &a, Transpose trans_a, const Tensor &b,
              Transpose trans_b);

// Max-subtracted softmax of a rank-1 tensor.
Tensor softmax(const Tensor &v);
void softmax_inplace(std::span<double> v);

enum class ElementwiseOp { kAdd, kMul, kTanh, kRelu, kSigmoid };

// Binary ops (add, mul) take a same-shape tensor; unary ops ignore `b`.
Tensor elementwise(ElementwiseOp op, const Tensor &a, const Tensor &b);
Tensor elementwise(ElementwiseOp op, const Tensor &a, double scalar);
Tensor elementwise(ElementwiseOp op, const Tensor &a);

Tensor add(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor tanh(const Tensor &a);
Tensor relu(const Tensor &a);
Tensor sigmoid(const Tensor &a);

double sigmoid(double x);

// y += alpha * x over equal-shaped tensors.
void axpy(double alpha, const Tensor &x, Tensor &y);

}  // namespace attnhar

#endif  // ATTNHAR_TENSOR_H_
