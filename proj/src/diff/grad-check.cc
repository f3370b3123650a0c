// src/diff/grad-check.cc

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

#include "xvec/diff/grad-check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xvec/base/error.h"

namespace xvec {
namespace diff {

double RelativeError(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double EvalScalar(const std::function<Var(Graph &)> &f) {
  Graph g;
  Var out = f(g);
  if (out.value().size() != 1) throw DimensionError("grad_check: function must return a scalar");
  double v = out.value()[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

void Accumulate(GradCheckReport &report, double analytic, double numeric) {
  const double err = RelativeError(analytic, numeric);
  if (report.num_checked == 0 || err > report.max_rel_error) {
    report.max_rel_error = err;
    report.worst_index = report.num_checked;
    report.analytic = analytic;
    report.numeric = numeric;
  }
  ++report.num_checked;
}

}  // namespace

GradCheckReport GradCheck(const std::function<Var(Graph &, Var)> &f, const Tensor &x, double h) {
  if (!(h > 0.0)) throw ConfigError("grad_check: step must be positive");
  Tensor point = x;
  point.DropGrad();

  std::vector<double> analytic;
  {
    Graph g;
    Tensor leaf = point;
    Var xv = g.Parameter(leaf);
    Var out = f(g, xv);
    if (out.value().size() != 1) throw DimensionError("grad_check: function must return a scalar");
    if (!std::isfinite(out.value()[0])) throw NumericError("grad_check: function value is not finite");
    g.Backward(out);
    auto grad = leaf.grad();
    analytic.assign(grad.begin(), grad.end());
  }

  GradCheckReport report;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = point[i];
    auto eval_at = [&](double v) {
      Tensor shifted = point;
      shifted[i] = v;
      return EvalScalar([&](Graph &g) { return f(g, g.Constant(shifted)); });
    };
    const double plus = eval_at(orig + h);
    const double minus = eval_at(orig - h);
    Accumulate(report, analytic[i], (plus - minus) / (2.0 * h));
  }
  return report;
}

GradCheckReport GradCheckParameters(const std::function<Var(Graph &)> &f, std::span<Tensor *const> params,
                                    double h) {
  if (!(h > 0.0)) throw ConfigError("grad_check: step must be positive");
  for (Tensor *p : params) p->ZeroGrad();
  {
    Graph g;
    Var out = f(g);
    if (out.value().size() != 1) throw DimensionError("grad_check: function must return a scalar");
    if (!std::isfinite(out.value()[0])) throw NumericError("grad_check: function value is not finite");
    g.Backward(out);
  }
  std::vector<std::vector<double>> analytic;
  for (Tensor *p : params) {
    auto grad = p->grad();
    analytic.emplace_back(grad.begin(), grad.end());
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor &p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + h;
      const double plus = EvalScalar(f);
      p[i] = orig - h;
      const double minus = EvalScalar(f);
      p[i] = orig;
      Accumulate(report, analytic[k][i], (plus - minus) / (2.0 * h));
    }
  }
  for (Tensor *p : params) p->ZeroGrad();
  return report;
}

}  // namespace diff
}  // namespace xvec
