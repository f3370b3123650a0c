// include/xvec/pipeline/gradient-suite.h

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

#ifndef XVEC_PIPELINE_GRADIENT_SUITE_H_
#define XVEC_PIPELINE_GRADIENT_SUITE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace xvec {

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t num_checked = 0;
};

/// Central-difference checks (h = 1e-5) of every diffcore op with respect to
/// each of its differentiable inputs, the loss terms, and the end-to-end total
/// loss of the baseline, GTM, GNCN-F0 and GNCN-F1 at all four tap positions,
/// on tiny random shapes drawn from `seed`.
std::vector<GradSuiteEntry> RunGradientSuite(std::uint64_t seed = 1);

inline constexpr double kGradSuiteTolerance = 1e-4;

}  // namespace xvec

#endif  // XVEC_PIPELINE_GRADIENT_SUITE_H_
