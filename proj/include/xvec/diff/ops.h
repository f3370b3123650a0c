// include/xvec/diff/ops.h

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

#ifndef XVEC_DIFF_OPS_H_
#define XVEC_DIFF_OPS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "xvec/diff/graph.h"
#include "xvec/diff/tensor.h"

namespace xvec {
namespace diff {

// Differentiable operations. Every op records its output on the graph owning
// its inputs; rank-3 inputs are [N x T x D] batches of frame sequences.

enum class Mode { kTrain, kEval };

/// Per-channel batch normalization parameters and running statistics.
struct BatchNorm {
  BatchNorm() = default;
  explicit BatchNorm(std::size_t dim, double momentum = 0.9, double epsilon = 1e-5);

  std::size_t dim() const { return gamma.size(); }

  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;
};

/// y = x W + b over the last axis. `x` may have any rank >= 1; W is
/// [Din x Dout]; b is [Dout].
Var Affine(Var x, Var w, std::optional<Var> b = std::nullopt);

/// Valid (unpadded) dilated convolution over the time axis. `x` is [T x Din]
/// or [N x T x Din]; `kernel` is [k x Din x Dout]. Output length is
/// T - (k - 1) * dilation.
Var DilatedConv1d(Var x, Var kernel, Var bias, std::size_t dilation);

Var Relu(Var x);

/// Normalizes each channel (last axis) over all leading axes. Train mode uses
/// biased batch statistics and, when `update_stats` is set, folds them into
/// the running estimates; eval mode uses the running estimates only.
Var BatchNorm1d(Var x, BatchNorm &bn, Mode mode, bool update_stats = true);
/// Eval-mode normalization with read-only parameters.
Var BatchNorm1d(Var x, const BatchNorm &bn);

/// Concatenated temporal mean and population standard deviation. [T x D] ->
/// [2D], [N x T x D] -> [N x 2D]. Variance is floored at kStatsPoolFloor
/// before the square root.
inline constexpr double kStatsPoolFloor = 1e-10;
Var StatsPool(Var x);

/// Mean over the batch of -log softmax(logits)[label].
Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels);

/// Squared Euclidean distance ||a - b||^2 summed over all elements.
Var MseSq(Var a, Var b);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Scale(Var a, double s);
Var Sum(Var x);

/// Rows of the result are columns idx[n] of m ([E x S] -> [N x E]).
Var GatherColumns(Var m, std::span<const int> idx);

/// Euclidean norm of each row ([N x D] -> [N]).
Var RowNorms(Var x);

}  // namespace diff
}  // namespace xvec

#endif  // XVEC_DIFF_OPS_H_
