// src/model/xvector-model.cc

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

#include "xvec/model/xvector-model.h"

#include <cmath>
#include <random>
#include <string_view>
#include <type_traits>

#include "xvec/base/error.h"

namespace xvec {

using diff::Graph;
using diff::Mode;
using diff::Shape;
using diff::Tensor;
using diff::Var;

diff::Var EmbeddingTaps::at(TapPosition tap) const {
  switch (tap) {
    case TapPosition::kIn: return in;
    case TapPosition::kFc: return fc;
    case TapPosition::kAf: return af;
    case TapPosition::kBn: return bn;
  }
  return fc;
}

namespace {

// Stream for the auxiliary projections, kept apart from the primary stream.
constexpr std::uint64_t kAuxStreamSalt = 0x9E3779B97F4A7C15ULL;

void FillUniform(Tensor &t, std::size_t fan_in, std::mt19937_64 &rng) {
  const double a = std::sqrt(3.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double &v : t.values()) v = dist(rng);
}

void WriteTensor(BinaryWriter &out, const Tensor &t) {
  out.WriteU64(t.rank());
  for (std::size_t d : t.shape()) out.WriteU64(d);
  out.WriteF64Vector(t.values());
}

void ReadTensorInto(BinaryReader &in, Tensor &t, const std::string &name) {
  std::size_t at = in.offset();
  std::uint64_t rank = in.ReadU64();
  if (rank > 8) throw FormatError(in.source() + ": implausible rank for " + name);
  Shape shape(rank);
  for (auto &d : shape) d = in.ReadU64();
  if (shape != t.shape())
    throw FormatError(in.source() + ": parameter " + name + " at byte offset " + std::to_string(at) + " has shape " +
                      diff::ShapeString(shape) + ", expected " + diff::ShapeString(t.shape()));
  std::vector<double> v = in.ReadF64Vector();
  if (v.size() != t.size()) throw FormatError(in.source() + ": value count mismatch for " + name);
  std::copy(v.begin(), v.end(), t.values().begin());
}

}  // namespace

XvectorModel XvectorModel::Build(const ModelSpec &spec, std::optional<AuxBranchSpec> aux, std::uint64_t seed) {
  spec.Validate();
  if (aux) {
    if (aux->lambda < 0.0) throw ConfigError("aux: lambda must be non-negative");
    if (aux->mode == AuxMode::kF1 && aux->projection_dim == 0)
      throw ConfigError("aux: F1 projection_dim must be positive");
  }
  XvectorModel m;
  m.spec_ = spec;
  m.aux_ = aux;
  m.seed_ = seed;
  std::mt19937_64 rng(seed);

  std::size_t din = spec.feature_dim;
  for (const auto &l : spec.frame_layers) {
    FrameLayer f;
    f.kernel = Tensor(Shape{l.kernel, din, l.out_dim});
    FillUniform(f.kernel, l.kernel * din, rng);
    f.bias = Tensor(Shape{l.out_dim});
    f.bn = diff::BatchNorm(l.out_dim, spec.bn_momentum, spec.bn_epsilon);
    f.dilation = l.dilation;
    m.frames_.push_back(std::move(f));
    din = l.out_dim;
  }
  din = spec.pooled_dim();
  for (std::size_t d : spec.embed_dims) {
    EmbedLayer e;
    e.weight = Tensor(Shape{din, d});
    FillUniform(e.weight, din, rng);
    e.bias = Tensor(Shape{d});
    e.bn = diff::BatchNorm(d, spec.bn_momentum, spec.bn_epsilon);
    m.embeds_.push_back(std::move(e));
    din = d;
  }
  m.theta_ = Tensor(Shape{din, spec.num_speakers});
  FillUniform(m.theta_, din, rng);
  if (spec.classifier_bias) m.classifier_bias_ = Tensor(Shape{spec.num_speakers});

  if (aux && aux->mode == AuxMode::kF1) {
    std::mt19937_64 aux_rng(seed ^ kAuxStreamSalt);
    for (std::size_t l = 0; l < kNumEmbeddingLayers; ++l) {
      Projection p;
      p.weight = Tensor(Shape{m.TapDim(l), aux->projection_dim});
      FillUniform(p.weight, m.TapDim(l), aux_rng);
      p.bias = Tensor(Shape{aux->projection_dim});
      m.projections_.push_back(std::move(p));
    }
  }
  return m;
}

std::size_t XvectorModel::TapDim(std::size_t layer) const {
  if (layer >= kNumEmbeddingLayers) throw DimensionError("embedding layer index out of range");
  const TapPosition tap = aux_ ? aux_->tap : TapPosition::kFc;
  if (tap == TapPosition::kIn) return layer == 0 ? spec_.pooled_dim() : spec_.embed_dims[0];
  return spec_.embed_dims[layer];
}

std::size_t XvectorModel::NoiseDim(std::size_t layer) const {
  if (!aux_) throw ConfigError("model has no auxiliary branch");
  return aux_->mode == AuxMode::kF1 ? aux_->projection_dim : TapDim(layer);
}

void XvectorModel::CheckInput(const Tensor &batch) const {
  if (batch.rank() != 2 && batch.rank() != 3)
    throw DimensionError("forward: input must be [T x D] or [N x T x D], got " + diff::ShapeString(batch.shape()));
  if (batch.shape().back() != spec_.feature_dim)
    throw DimensionError("forward: feature dimension " + std::to_string(batch.shape().back()) + ", model expects " +
                         std::to_string(spec_.feature_dim));
  const std::size_t t = batch.dim(batch.rank() == 3 ? 1 : 0);
  if (t < spec_.min_frames())
    throw InputLengthError("forward: " + std::to_string(t) + " frames is shorter than the receptive field (" +
                           std::to_string(spec_.min_frames()) + " frames)");
}

template <typename Self>
Var XvectorModel::RunFrames(Self &self, Graph &g, Var x, Mode mode, bool update_stats) {
  Var h = x;
  for (auto &layer : self.frames_) {
    h = diff::DilatedConv1d(h, g.Parameter(layer.kernel), g.Parameter(layer.bias), layer.dilation);
    h = diff::Relu(h);
    if constexpr (std::is_const_v<Self>) {
      h = diff::BatchNorm1d(h, layer.bn);
    } else {
      h = diff::BatchNorm1d(h, layer.bn, mode, update_stats);
    }
  }
  return diff::StatsPool(h);
}

ForwardRecord XvectorModel::Forward(Graph &g, const Tensor &batch, Mode mode, bool update_stats) {
  CheckInput(batch);
  if (batch.rank() == 2) {
    // A single utterance is a batch of one so downstream shapes are [N x D].
    Tensor b3 = batch;
    b3.Reshape(Shape{1, batch.dim(0), batch.dim(1)});
    return Forward(g, b3, mode, update_stats);
  }
  ForwardRecord rec;
  Var h = RunFrames(*this, g, g.Constant(batch), mode, update_stats);
  for (std::size_t l = 0; l < kNumEmbeddingLayers; ++l) {
    EmbedLayer &e = embeds_[l];
    EmbeddingTaps &t = rec.taps[l];
    t.in = h;
    t.fc = diff::Affine(h, g.Parameter(e.weight), g.Parameter(e.bias));
    t.af = diff::Relu(t.fc);
    t.bn = diff::BatchNorm1d(t.af, e.bn, mode, update_stats);
    h = t.bn;
  }
  rec.classifier_input = h;
  rec.theta = g.Parameter(theta_);
  std::optional<Var> bias;
  if (classifier_bias_) bias = g.Parameter(*classifier_bias_);
  rec.logits = diff::Affine(h, rec.theta, bias);
  rec.xvector = rec.taps[0].fc;
  return rec;
}

Tensor XvectorModel::ExtractEmbedding(const Tensor &frames) const {
  if (frames.rank() != 2) throw DimensionError("extract: expected [T x D] frames, got " + diff::ShapeString(frames.shape()));
  CheckInput(frames);
  Graph g;
  Var pooled = RunFrames(*this, g, g.Constant(frames), Mode::kEval, false);
  Var fc = diff::Affine(pooled, g.Parameter(embeds_[0].weight), g.Parameter(embeds_[0].bias));
  return fc.value();
}

Var XvectorModel::AuxProject(Graph &g, Var tapped, std::size_t layer) {
  if (!aux_) throw ConfigError("aux_project: model has no auxiliary branch");
  if (layer >= kNumEmbeddingLayers) throw DimensionError("aux_project: layer index out of range");
  if (tapped.shape().empty() || tapped.shape().back() != TapDim(layer))
    throw DimensionError("aux_project: tapped vector " + diff::ShapeString(tapped.shape()) + " does not match tap dim " +
                         std::to_string(TapDim(layer)));
  if (aux_->mode == AuxMode::kF0) return tapped;
  Projection &p = projections_[layer];
  return diff::Affine(tapped, g.Parameter(p.weight), g.Parameter(p.bias));
}

std::vector<NamedParameter> XvectorModel::NamedParameters() {
  std::vector<NamedParameter> out;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const std::string p = "tdnn" + std::to_string(i + 1) + ".";
    out.push_back({p + "kernel", &frames_[i].kernel});
    out.push_back({p + "bias", &frames_[i].bias});
    out.push_back({p + "bn.gamma", &frames_[i].bn.gamma});
    out.push_back({p + "bn.beta", &frames_[i].bn.beta});
  }
  for (std::size_t i = 0; i < embeds_.size(); ++i) {
    const std::string p = "embed" + std::to_string(i + 6) + ".";
    out.push_back({p + "weight", &embeds_[i].weight});
    out.push_back({p + "bias", &embeds_[i].bias});
    out.push_back({p + "bn.gamma", &embeds_[i].bn.gamma});
    out.push_back({p + "bn.beta", &embeds_[i].bn.beta});
  }
  out.push_back({"classifier.theta", &theta_});
  if (classifier_bias_) out.push_back({"classifier.bias", &*classifier_bias_});
  for (std::size_t l = 0; l < projections_.size(); ++l) {
    const std::string p = "aux" + std::to_string(l + 6) + ".";
    out.push_back({p + "weight", &projections_[l].weight});
    out.push_back({p + "bias", &projections_[l].bias});
  }
  return out;
}

std::vector<Tensor *> XvectorModel::Parameters() {
  std::vector<Tensor *> out;
  for (auto &np : NamedParameters()) out.push_back(np.tensor);
  return out;
}

std::vector<Tensor *> XvectorModel::PrimaryParameters() {
  std::vector<Tensor *> out;
  for (auto &np : NamedParameters())
    if (np.name.rfind("aux", 0) != 0) out.push_back(np.tensor);
  return out;
}

std::size_t XvectorModel::NumParameters() const {
  std::size_t n = 0;
  for (auto &np : const_cast<XvectorModel *>(this)->NamedParameters()) n += np.tensor->size();
  return n;
}

void XvectorModel::ZeroGrad() {
  for (Tensor *t : Parameters()) t->ZeroGrad();
}

std::uint64_t XvectorModel::StateHash() const {
  BinaryWriter w;
  Write(w);
  return Fnv1a64(w.buffer());
}

void XvectorModel::Write(BinaryWriter &out) const {
  WriteModelSpec(out, spec_);
  out.WriteU32(aux_ ? 1 : 0);
  if (aux_) {
    SystemConfig carrier;
    carrier.aux = aux_;
    WriteSystemConfig(out, carrier);
  }
  out.WriteU64(seed_);
  auto params = const_cast<XvectorModel *>(this)->NamedParameters();
  out.WriteU64(params.size());
  for (const auto &np : params) {
    out.WriteString(np.name);
    WriteTensor(out, *np.tensor);
  }
  auto write_bn = [&](const diff::BatchNorm &bn) {
    out.WriteF64Vector(bn.running_mean);
    out.WriteF64Vector(bn.running_var);
  };
  for (const auto &f : frames_) write_bn(f.bn);
  for (const auto &e : embeds_) write_bn(e.bn);
}

XvectorModel XvectorModel::Read(BinaryReader &in) {
  ModelSpec spec = ReadModelSpec(in);
  std::optional<AuxBranchSpec> aux;
  if (in.ReadU32() != 0) aux = ReadSystemConfig(in).aux;
  std::uint64_t seed = in.ReadU64();
  XvectorModel m;
  try {
    m = Build(spec, aux, seed);
  } catch (const ConfigError &e) {
    throw FormatError(in.source() + ": stored model spec is invalid: " + e.what());
  }
  auto params = m.NamedParameters();
  std::uint64_t n = in.ReadU64();
  if (n != params.size())
    throw FormatError(in.source() + ": " + std::to_string(n) + " parameter tensors stored, model has " +
                      std::to_string(params.size()));
  for (auto &np : params) {
    std::string name = in.ReadString();
    if (name != np.name) throw FormatError(in.source() + ": expected parameter " + np.name + ", found " + name);
    ReadTensorInto(in, *np.tensor, name);
  }
  auto read_bn = [&](diff::BatchNorm &bn) {
    auto mean = in.ReadF64Vector();
    auto var = in.ReadF64Vector();
    if (mean.size() != bn.dim() || var.size() != bn.dim())
      throw FormatError(in.source() + ": batchnorm statistics size mismatch near byte offset " +
                        std::to_string(in.offset()));
    bn.running_mean = std::move(mean);
    bn.running_var = std::move(var);
  };
  for (auto &f : m.frames_) read_bn(f.bn);
  for (auto &e : m.embeds_) read_bn(e.bn);
  return m;
}

}  // namespace xvec
