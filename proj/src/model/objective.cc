// src/model/objective.cc

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

#include "xvec/model/objective.h"

#include <algorithm>
#include <cmath>

#include "xvec/base/error.h"
#include "xvec/diff/ops.h"

namespace xvec {

using diff::Graph;
using diff::Tensor;
using diff::Var;

std::vector<double> GtmPosterior(const Tensor &theta, std::span<const double> f) {
  if (theta.rank() != 2 || theta.dim(0) != f.size())
    throw DimensionError("gtm_posterior: embedding of dim " + std::to_string(f.size()) + " against theta " +
                         diff::ShapeString(theta.shape()));
  const std::size_t e = theta.dim(0), s = theta.dim(1);
  std::vector<double> logit(s, 0.0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < e; ++i) logit[j] += f[i] * theta[i * s + j];
  const double mx = *std::max_element(logit.begin(), logit.end());
  double z = 0.0;
  for (double l : logit) z += std::exp(l - mx);
  const double lse = mx + std::log(z);
  for (double &l : logit) l = std::exp(l - lse);
  return logit;
}

Var GtmRegularizer(Var f, Var theta, std::span<const int> labels, NormConvention norm) {
  if (f.shape().size() != 2 || theta.shape().size() != 2 || f.shape()[1] != theta.shape()[0])
    throw DimensionError("gtm_regularizer: embeddings " + diff::ShapeString(f.shape()) + " against theta " +
                         diff::ShapeString(theta.shape()));
  if (labels.size() != f.shape()[0]) throw LabelError("gtm_regularizer: label count does not match batch");
  Var centers = diff::GatherColumns(theta, labels);
  if (norm == NormConvention::kSquared) return diff::MseSq(f, centers);
  return diff::Sum(diff::RowNorms(diff::Sub(f, centers)));
}

Var AuxMseLoss(std::span<const Var> projected, std::span<const Tensor> targets, NormConvention norm) {
  if (projected.empty() || projected.size() != targets.size())
    throw DimensionError("aux_mse_loss: " + std::to_string(projected.size()) + " projected layers, " +
                         std::to_string(targets.size()) + " target layers");
  Graph &g = *projected[0].graph();
  const std::size_t n = projected[0].shape().at(0);
  Var total;
  for (std::size_t l = 0; l < projected.size(); ++l) {
    if (projected[l].shape() != targets[l].shape())
      throw DimensionError("aux_mse_loss: layer " + std::to_string(l) + " projected " +
                           diff::ShapeString(projected[l].shape()) + " vs target " +
                           diff::ShapeString(targets[l].shape()));
    Var target = g.Constant(targets[l]);
    Var term = norm == NormConvention::kSquared ? diff::MseSq(projected[l], target)
                                                : diff::Sum(diff::RowNorms(diff::Sub(projected[l], target)));
    total = total.valid() ? diff::Add(total, term) : term;
  }
  return diff::Scale(total, 1.0 / static_cast<double>(n));
}

Var TotalLoss(Var ce, Var aux, double weight) {
  if (weight < 0.0 || !std::isfinite(weight)) throw ConfigError("total_loss: weight must be a non-negative number");
  return diff::Add(ce, diff::Scale(aux, weight));
}

LossTerms ComputeLoss(XvectorModel &model, Graph &g, const ForwardRecord &rec, std::span<const int> labels,
                      const SystemConfig &system, double weight, std::span<const Tensor> noise_targets) {
  LossTerms terms;
  terms.ce = diff::SoftmaxCrossEntropy(rec.logits, labels);
  terms.weight = weight;
  switch (system.objective) {
    case Objective::kBaseline:
      terms.total = terms.ce;
      break;
    case Objective::kGtm:
      terms.aux = GtmRegularizer(rec.classifier_input, rec.theta, labels, system.gtm_norm);
      terms.total = TotalLoss(terms.ce, terms.aux, weight);
      break;
    case Objective::kGncn: {
      if (!model.aux() || !system.aux) throw ConfigError("GNCN objective needs an auxiliary branch");
      std::vector<Var> projected;
      for (std::size_t l = 0; l < kNumEmbeddingLayers; ++l)
        projected.push_back(model.AuxProject(g, rec.taps[l].at(model.aux()->tap), l));
      terms.aux = AuxMseLoss(projected, noise_targets, system.aux->norm);
      terms.total = TotalLoss(terms.ce, terms.aux, weight);
      break;
    }
  }
  return terms;
}

}  // namespace xvec
