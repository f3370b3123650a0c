// include/xvec/diff/grad-check.h

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

#ifndef XVEC_DIFF_GRAD_CHECK_H_
#define XVEC_DIFF_GRAD_CHECK_H_

#include <cstddef>
#include <functional>
#include <span>

#include "xvec/diff/graph.h"
#include "xvec/diff/tensor.h"

namespace xvec {
namespace diff {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;  // flat index over all checked coordinates
  double analytic = 0.0;        // at worst_index
  double numeric = 0.0;         // at worst_index
  std::size_t num_checked = 0;
};

/// |a - b| / max(|a|, |b|, floor). The floor keeps coordinates whose true
/// gradient is ~0 from reporting central-difference rounding noise as a
/// large relative error.
inline constexpr double kRelErrorFloor = 1e-6;
double RelativeError(double analytic, double numeric, double floor = kRelErrorFloor);

/// Compares the reverse-mode gradient of the scalar f(x) with central
/// differences (f(x+h) - f(x-h)) / 2h for every coordinate of x.
GradCheckReport GradCheck(const std::function<Var(Graph &, Var)> &f, const Tensor &x, double h = 1e-5);

/// Same check over every coordinate of a set of parameter tensors. `f` builds
/// the loss on a fresh graph from the current parameter values; it must not
/// mutate anything besides parameter gradients.
GradCheckReport GradCheckParameters(const std::function<Var(Graph &)> &f, std::span<Tensor *const> params,
                                    double h = 1e-5);

}  // namespace diff
}  // namespace xvec

#endif  // XVEC_DIFF_GRAD_CHECK_H_
