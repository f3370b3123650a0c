// include/xvec/diff/adam.h

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

#ifndef XVEC_DIFF_ADAM_H_
#define XVEC_DIFF_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xvec/base/binary-io.h"
#include "xvec/diff/tensor.h"

namespace xvec {
namespace diff {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// L2 coefficient added to the gradient (decay * param) before the
  /// moment update.
  double weight_decay = 1e-4;
};

/// Bias-corrected Adam. Moment buffers are bound to parameters by position,
/// so Step() must always receive the same parameter list in the same order.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Applies one update from each parameter's gradient buffer (absent
  /// buffers count as zero gradient).
  void Step(std::span<Tensor *const> params);

  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  const AdamOptions &options() const { return options_; }
  std::uint64_t step_count() const { return t_; }
  const std::vector<std::vector<double>> &first_moments() const { return m_; }
  const std::vector<std::vector<double>> &second_moments() const { return v_; }

  void Write(BinaryWriter &out) const;
  static Adam Read(BinaryReader &in);

 private:
  AdamOptions options_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace diff
}  // namespace xvec

#endif  // XVEC_DIFF_ADAM_H_
