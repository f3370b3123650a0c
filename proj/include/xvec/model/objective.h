// include/xvec/model/objective.h

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

#ifndef XVEC_MODEL_OBJECTIVE_H_
#define XVEC_MODEL_OBJECTIVE_H_

#include <span>
#include <vector>

#include "xvec/diff/graph.h"
#include "xvec/diff/tensor.h"
#include "xvec/model/model-spec.h"
#include "xvec/model/xvector-model.h"

namespace xvec {

/// p(s | f) = exp(f . theta_s) / sum_s' exp(f . theta_s'), log-sum-exp
/// stabilized. `theta` is [E x S].
std::vector<double> GtmPosterior(const diff::Tensor &theta, std::span<const double> f);

/// R = sum_n ||f_n - theta_{label(n)}||^2 over the batch (or the plain norm
/// under NormConvention::kLiteral). `f` is [N x E], `theta` is [E x S].
diff::Var GtmRegularizer(diff::Var f, diff::Var theta, std::span<const int> labels,
                         NormConvention norm = NormConvention::kSquared);

/// L_MSE = (1/N) sum_l sum_n ||v~_n^l - g_n^l||^2. Normalized by the batch
/// size only; not by the number of layers or the vector dimension.
diff::Var AuxMseLoss(std::span<const diff::Var> projected, std::span<const diff::Tensor> targets,
                     NormConvention norm = NormConvention::kSquared);

/// ce + weight * aux. Throws ConfigError for a negative weight.
diff::Var TotalLoss(diff::Var ce, diff::Var aux, double weight);

struct LossTerms {
  diff::Var ce;
  diff::Var aux;  // L_MSE, R, or an unset Var for the baseline
  diff::Var total;
  double weight = 0.0;

  double aux_value() const { return aux.valid() ? aux.value()[0] : 0.0; }
};

/// Builds the system's objective on top of a forward pass. `noise_targets`
/// holds one [N x NoiseDim(l)] tensor per embedding layer (GNCN only);
/// `weight` is lambda for GNCN and alpha for GTM.
LossTerms ComputeLoss(XvectorModel &model, diff::Graph &g, const ForwardRecord &rec, std::span<const int> labels,
                      const SystemConfig &system, double weight, std::span<const diff::Tensor> noise_targets);

}  // namespace xvec

#endif  // XVEC_MODEL_OBJECTIVE_H_
