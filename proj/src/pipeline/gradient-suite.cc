// src/pipeline/gradient-suite.cc

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

#include "xvec/pipeline/gradient-suite.h"

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "xvec/diff/grad-check.h"
#include "xvec/diff/ops.h"
#include "xvec/model/objective.h"
#include "xvec/model/xvector-model.h"

namespace xvec {

using diff::GradCheck;
using diff::GradCheckParameters;
using diff::GradCheckReport;
using diff::Graph;
using diff::Mode;
using diff::Shape;
using diff::Tensor;
using diff::Var;

namespace {

Tensor Random(Shape shape, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(std::move(shape));
  for (double &v : t.values()) v = n(rng);
  return t;
}

// sum(c * y) for fixed pseudo-random c, built from the available ops.
Var Project(Graph &g, Var y) {
  Tensor c(y.value().shape());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
  Var zero = g.Constant(Tensor(y.value().shape()));
  return Scale(Sub(MseSq(Add(y, g.Constant(c)), zero), MseSq(y, zero)), 0.5);
}

class Suite {
 public:
  void Add(const std::string &name, const GradCheckReport &r) { out.push_back({name, r.max_rel_error, r.num_checked}); }
  void Input(const std::string &name, const std::function<Var(Graph &, Var)> &f, const Tensor &x) {
    Add(name, GradCheck(f, x, 1e-5));
  }
  std::vector<GradSuiteEntry> out;
};

}  // namespace

std::vector<GradSuiteEntry> RunGradientSuite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Suite s;
  const std::size_t n = 3, din = 4, dout = 5;
  Tensor x = Random({n, din}, rng), w = Random({din, dout}, rng), b = Random({dout}, rng);
  s.Input("affine/x", [&](Graph &g, Var v) { return Project(g, Affine(v, g.Constant(w), g.Constant(b))); }, x);
  s.Input("affine/W", [&](Graph &g, Var v) { return Project(g, Affine(g.Constant(x), v, g.Constant(b))); }, w);
  s.Input("affine/b", [&](Graph &g, Var v) { return Project(g, Affine(g.Constant(x), g.Constant(w), v)); }, b);

  for (std::size_t dil = 1; dil <= 3; ++dil) {
    const std::size_t taps = 3, t_len = (taps - 1) * dil + 4;
    Tensor cx = Random({2, t_len, din}, rng), ck = Random({taps, din, dout}, rng);
    const std::string tag = "dilated_conv1d(d=" + std::to_string(dil) + ")";
    s.Input(tag + "/x", [&](Graph &g, Var v) { return Project(g, DilatedConv1d(v, g.Constant(ck), g.Constant(b), dil)); },
            cx);
    s.Input(tag + "/kernel",
            [&](Graph &g, Var v) { return Project(g, DilatedConv1d(g.Constant(cx), v, g.Constant(b), dil)); }, ck);
    s.Input(tag + "/bias",
            [&](Graph &g, Var v) { return Project(g, DilatedConv1d(g.Constant(cx), g.Constant(ck), v, dil)); }, b);
  }

  // Keep inputs away from the kink so the central difference is valid.
  Tensor rx = Random({n, din}, rng);
  for (double &v : rx.values())
    if (std::abs(v) < 0.05) v = v < 0 ? -0.1 : 0.1;
  s.Input("relu", [&](Graph &g, Var v) { return Project(g, Relu(v)); }, rx);

  Tensor bx = Random({5, din}, rng);
  diff::BatchNorm bn(din);
  for (std::size_t c = 0; c < din; ++c) {
    bn.gamma[c] = 0.5 + 0.2 * static_cast<double>(c);
    bn.beta[c] = 0.1 * static_cast<double>(c);
    bn.running_mean[c] = 0.3;
    bn.running_var[c] = 1.5;
  }
  s.Input("batchnorm1d(train)/x", [&](Graph &g, Var v) { return Project(g, BatchNorm1d(v, bn, Mode::kTrain, false)); },
          bx);
  s.Input("batchnorm1d(eval)/x", [&](Graph &g, Var v) { return Project(g, BatchNorm1d(v, bn, Mode::kEval)); }, bx);
  {
    Tensor *params[] = {&bn.gamma, &bn.beta};
    s.Add("batchnorm1d(train)/gamma,beta",
          GradCheckParameters([&](Graph &g) { return Project(g, BatchNorm1d(g.Constant(bx), bn, Mode::kTrain, false)); },
                              params, 1e-5));
  }

  Tensor px = Random({2, 7, din}, rng);
  s.Input("stats_pool", [&](Graph &g, Var v) { return Project(g, StatsPool(v)); }, px);

  std::vector<int> labels = {0, 3, 1};
  Tensor logits = Random({n, dout}, rng);
  s.Input("softmax_cross_entropy", [&](Graph &, Var v) { return SoftmaxCrossEntropy(v, labels); }, logits);
  Tensor other = Random({n, din}, rng);
  s.Input("mse_sq", [&](Graph &g, Var v) { return MseSq(v, g.Constant(other)); }, x);
  s.Input("add,sub,scale,sum", [&](Graph &g, Var v) { return Sum(Scale(Sub(Add(v, v), g.Constant(other)), 1.7)); }, x);
  s.Input("gather_columns", [&](Graph &g, Var v) { return Project(g, GatherColumns(v, labels)); }, w);
  s.Input("row_norms", [&](Graph &g, Var v) { return Project(g, RowNorms(v)); }, x);

  Tensor f = Random({n, din}, rng), theta = Random({din, dout}, rng);
  for (NormConvention norm : {NormConvention::kSquared, NormConvention::kLiteral}) {
    const std::string tag = "gtm_regularizer(" + std::string(NormName(norm)) + ")";
    s.Input(tag + "/f", [&](Graph &g, Var v) { return GtmRegularizer(v, g.Constant(theta), labels, norm); }, f);
    s.Input(tag + "/theta", [&](Graph &g, Var v) { return GtmRegularizer(g.Constant(f), v, labels, norm); }, theta);
    std::vector<Tensor> targets = {Random({n, din}, rng), Random({n, din}, rng)};
    const std::string mtag = "aux_mse(" + std::string(NormName(norm)) + ")";
    s.Input(mtag, [&](Graph &, Var v) {
      std::vector<Var> proj = {v, Scale(v, -0.5)};
      return AuxMseLoss(proj, targets, norm);
    }, f);
  }
  s.Input("total_loss", [&](Graph &g, Var v) { return TotalLoss(Sum(v), MseSq(v, g.Constant(other)), 0.1); }, x);

  // End to end through the full network on a tiny spec.
  ModelSpec spec;
  spec.feature_dim = 4;
  spec.frame_layers = {{8, 5, 1}, {8, 3, 2}, {8, 3, 3}, {8, 1, 1}, {16, 1, 1}};
  spec.embed_dims = {8, 8};
  spec.num_speakers = 3;
  const std::vector<int> batch_labels = {0, 1, 2, 1};
  Tensor batch = Random({4, 16, 4}, rng);
  auto end_to_end = [&](const std::string &name, SystemConfig sys) {
    XvectorModel m = XvectorModel::Build(SpecForSystem(spec, sys), sys.aux, seed + 17);
    std::vector<Tensor> targets;
    if (sys.aux)
      for (std::size_t l = 0; l < kNumEmbeddingLayers; ++l) targets.push_back(Random({4, m.NoiseDim(l)}, rng));
    const double weight = sys.objective == Objective::kGtm ? sys.gtm_alpha : 0.1;
    auto params = m.Parameters();
    s.Add("end_to_end/" + name, GradCheckParameters(
                                    [&](Graph &g) {
                                      ForwardRecord r = m.Forward(g, batch, Mode::kTrain, false);
                                      return ComputeLoss(m, g, r, batch_labels, sys, weight, targets).total;
                                    },
                                    params, 1e-5));
  };
  end_to_end("x-vector", SystemPreset("x-vector"));
  end_to_end("GTM", SystemPreset("GTM"));
  for (const char *mode : {"F0", "F1"})
    for (const char *tap : {"IN", "FC", "AF", "BN"}) {
      const std::string name = std::string("GNCN-") + mode + "-" + tap;
      SystemConfig sys = SystemPreset(name);
      if (sys.aux->mode == AuxMode::kF1) sys.aux->projection_dim = 6;
      end_to_end(name, sys);
    }
  return s.out;
}

}  // namespace xvec
