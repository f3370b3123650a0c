// include/xvec/diff/tensor.h

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVEC_DIFF_TENSOR_H_
#define XVEC_DIFF_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace xvec {
namespace diff {

using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
// Storage aligned to Eigen's packet size: vectorized reductions peel scalar
// elements up to the first aligned address, so unaligned buffers would make
// summation order (and the last bits of results) depend on heap layout.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

std::size_t NumElements(const Shape &shape);
std::string ShapeString(const Shape &shape);

/// Dense row-major array of doubles with a lazily allocated gradient buffer
/// of the same shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor Vector(std::vector<double> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
  }

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double *data() { return values_.data(); }
  const double *data() const { return values_.data(); }
  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double item() const;

  bool has_grad() const { return !grad_.empty(); }
  /// Allocates a zero gradient on first access.
  std::span<double> grad();
  std::span<const double> grad() const { return grad_; }
  void ZeroGrad();
  void DropGrad() { grad_.clear(); grad_.shrink_to_fit(); }

  /// Views the tensor as a matrix whose column count is the last dimension
  /// and whose row count is the product of the leading dimensions.
  MatrixMap AsMatrix();
  ConstMatrixMap AsMatrix() const;
  MatrixMap GradAsMatrix();

  void Reshape(Shape shape);

  /// Throws NumericError naming `what` if any value is NaN or infinite.
  void CheckFinite(std::string_view what) const;

  bool operator==(const Tensor &other) const {
    return shape_ == other.shape_ && values_ == other.values_;
  }

 private:
  Shape shape_;
  AlignedBuffer values_;
  AlignedBuffer grad_;
};

}  // namespace diff
}  // namespace xvec

#endif  // XVEC_DIFF_TENSOR_H_
