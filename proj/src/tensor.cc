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

#include "attnhar/tensor.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Stride = Eigen::OuterStride<>;
using ConstMap = Eigen::Map<const RowMajor, Eigen::Unaligned, Stride>;
using MutMap = Eigen::Map<RowMajor, Eigen::Unaligned, Stride>;

std::size_t product(const Tensor::Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

bool is_binary(ElementwiseOp op) {
  return op == ElementwiseOp::kAdd || op == ElementwiseOp::kMul;
}

double apply_unary(ElementwiseOp op, double x) {
  switch (op) {
    case ElementwiseOp::kTanh:
      return std::tanh(x);
    case ElementwiseOp::kRelu:
      return x > 0.0 ? x : 0.0;
    case ElementwiseOp::kSigmoid:
      return sigmoid(x);
    default:
      throw ContractError("elementwise: binary op used without operand");
  }
}

double apply_binary(ElementwiseOp op, double x, double y) {
  return op == ElementwiseOp::kAdd ? x + y : x * y;
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  values_.assign(product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  if (product(shape_) != values_.size()) {
    throw DimensionError("tensor shape " + attnhar::shape_string(shape_) +
                         " does not match " + std::to_string(values_.size()) +
                         " values");
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto &r : rows) {
    if (r.size() != n_cols) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Tensor({n_rows, n_cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

void Tensor::validate_shape(const Shape &shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw DimensionError("tensor rank must be 1.." + std::to_string(kMaxRank) +
                         ", got " + std::to_string(shape.size()));
  }
  for (std::size_t d : shape) {
    if (d == 0) {
      throw DimensionError("tensor dimensions must be positive, got " +
                           attnhar::shape_string(shape));
    }
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string());
  }
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t stride = values_.size() / shape_.at(0);
  return std::span<double>(values_).subspan(i * stride, stride);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t stride = values_.size() / shape_.at(0);
  return std::span<const double>(values_).subspan(i * stride, stride);
}

Tensor Tensor::reshaped(Shape shape) const {
  Tensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

void Tensor::reshape(Shape shape) {
  validate_shape(shape);
  if (product(shape) != values_.size()) {
    throw DimensionError("cannot reshape " + shape_string() + " to " +
                         attnhar::shape_string(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

std::string Tensor::shape_string() const { return attnhar::shape_string(shape_); }

std::string shape_string(const Tensor::Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_finite(const Tensor &t, std::string_view what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      throw NumericError(std::string(what) + ": non-finite value at flat index " +
                         std::to_string(i));
    }
  }
}

void gemm(Transpose trans_a, Transpose trans_b, std::size_t m, std::size_t n,
          std::size_t k, double alpha, const double *a, std::size_t lda,
          const double *b, std::size_t ldb, double beta, double *c,
          std::size_t ldc) {
  if (m == 0 || n == 0) return;
  MutMap cm(c, m, n, Stride(ldc));
  if (beta == 0.0) {
    cm.setZero();
  } else if (beta != 1.0) {
    cm *= beta;
  }
  if (k == 0 || alpha == 0.0) return;
  const bool ta = trans_a == Transpose::kYes;
  const bool tb = trans_b == Transpose::kYes;
  ConstMap am(a, ta ? k : m, ta ? m : k, Stride(lda));
  ConstMap bm(b, tb ? n : k, tb ? k : n, Stride(ldb));
  if (!ta && !tb) {
    cm.noalias() += alpha * am * bm;
  } else if (ta && !tb) {
    cm.noalias() += alpha * am.transpose() * bm;
  } else if (!ta && tb) {
    cm.noalias() += alpha * am * bm.transpose();
  } else {
    cm.noalias() += alpha * am.transpose() * bm.transpose();
  }
}

Tensor matmul(const Tensor &a, Transpose trans_a, const Tensor &b,
              Transpose trans_b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw DimensionError("matmul expects matrices, got " + a.shape_string() +
                         " and " + b.shape_string());
  }
  const bool ta = trans_a == Transpose::kYes;
  const bool tb = trans_b == Transpose::kYes;
  const std::size_t m = ta ? a.dim(1) : a.dim(0);
  const std::size_t k = ta ? a.dim(0) : a.dim(1);
  const std::size_t kb = tb ? b.dim(1) : b.dim(0);
  const std::size_t n = tb ? b.dim(0) : b.dim(1);
  if (k != kb) {
    throw DimensionError("matmul inner dimensions disagree: " +
                         a.shape_string() + (ta ? "^T" : "") + " x " +
                         b.shape_string() + (tb ? "^T" : ""));
  }
  Tensor out({m, n});
  gemm(trans_a, trans_b, m, n, k, 1.0, a.data(), a.dim(1), b.data(), b.dim(1),
       0.0, out.data(), n);
  check_finite(out, "matmul");
  return out;
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  return matmul(a, Transpose::kNo, b, Transpose::kNo);
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) throw DimensionError("softmax of an empty vector");
  const double peak = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double &x : v) {
    x = std::exp(x - peak);
    total += x;
  }
  for (double &x : v) x /= total;
}

Tensor softmax(const Tensor &v) {
  if (v.rank() != 1) {
    throw DimensionError("softmax expects a vector, got " + v.shape_string());
  }
  Tensor out = v;
  softmax_inplace(out.values());
  check_finite(out, "softmax");
  return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor &a, const Tensor &b) {
  if (!is_binary(op)) {
    throw ContractError("elementwise: unary op given a second operand");
  }
  if (a.shape() != b.shape()) {
    throw DimensionError("elementwise shape mismatch: " + a.shape_string() +
                         " vs " + b.shape_string());
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = apply_binary(op, a[i], b[i]);
  }
  check_finite(out, "elementwise");
  return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor &a, double scalar) {
  if (!is_binary(op)) {
    throw ContractError("elementwise: unary op given a second operand");
  }
  Tensor out = a;
  for (double &x : out.values()) x = apply_binary(op, x, scalar);
  check_finite(out, "elementwise");
  return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor &a) {
  Tensor out = a;
  for (double &x : out.values()) x = apply_unary(op, x);
  check_finite(out, "elementwise");
  return out;
}

Tensor add(const Tensor &a, const Tensor &b) {
  return elementwise(ElementwiseOp::kAdd, a, b);
}
Tensor mul(const Tensor &a, const Tensor &b) {
  return elementwise(ElementwiseOp::kMul, a, b);
}
Tensor tanh(const Tensor &a) { return elementwise(ElementwiseOp::kTanh, a); }
Tensor relu(const Tensor &a) { return elementwise(ElementwiseOp::kRelu, a); }
Tensor sigmoid(const Tensor &a) {
  return elementwise(ElementwiseOp::kSigmoid, a);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void axpy(double alpha, const Tensor &x, Tensor &y) {
  if (x.shape() != y.shape()) {
    throw DimensionError("axpy shape mismatch: " + x.shape_string() + " vs " +
                         y.shape_string());
  }
  double *out = y.data();
  const double *in = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += alpha * in[i];
}

}  // namespace attnhar
