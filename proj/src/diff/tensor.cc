// src/diff/tensor.cc

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

#include "xvec/diff/tensor.h"

#include <cmath>
#include <sstream>

#include "xvec/base/error.h"

namespace xvec {
namespace diff {

std::size_t NumElements(const Shape &shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) s << (i ? "x" : "") << shape[i];
  s << ']';
  return s.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(NumElements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (values_.size() != NumElements(shape_))
    throw DimensionError("tensor of shape " + ShapeString(shape_) + " given " +
                         std::to_string(values_.size()) + " values");
}

double Tensor::item() const {
  if (values_.size() != 1)
    throw DimensionError("item() on tensor of shape " + ShapeString(shape_));
  return values_[0];
}

std::span<double> Tensor::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor::ZeroGrad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

namespace {
std::pair<Eigen::Index, Eigen::Index> MatrixDims(const Shape &shape) {
  if (shape.empty()) return {1, 1};
  Eigen::Index cols = static_cast<Eigen::Index>(shape.back());
  Eigen::Index rows = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) rows *= static_cast<Eigen::Index>(shape[i]);
  return {rows, cols};
}
}  // namespace

MatrixMap Tensor::AsMatrix() {
  auto [r, c] = MatrixDims(shape_);
  return MatrixMap(values_.data(), r, c);
}

ConstMatrixMap Tensor::AsMatrix() const {
  auto [r, c] = MatrixDims(shape_);
  return ConstMatrixMap(values_.data(), r, c);
}

MatrixMap Tensor::GradAsMatrix() {
  auto [r, c] = MatrixDims(shape_);
  return MatrixMap(grad().data(), r, c);
}

void Tensor::Reshape(Shape shape) {
  if (NumElements(shape) != values_.size())
    throw DimensionError("cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
  shape_ = std::move(shape);
}

void Tensor::CheckFinite(std::string_view what) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite value " << values_[i] << " at index " << i << " in "
          << what << " " << ShapeString(shape_);
      throw NumericError(msg.str());
    }
  }
}

}  // namespace diff
}  // namespace xvec
