// include/xvec/model/xvector-model.h

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

#ifndef XVEC_MODEL_XVECTOR_MODEL_H_
#define XVEC_MODEL_XVECTOR_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xvec/base/binary-io.h"
#include "xvec/diff/graph.h"
#include "xvec/diff/ops.h"
#include "xvec/diff/tensor.h"
#include "xvec/model/model-spec.h"

namespace xvec {

inline constexpr std::size_t kNumEmbeddingLayers = 2;

/// Values inside one embedding layer, in evaluation order.
struct EmbeddingTaps {
  diff::Var in;  // layer input
  diff::Var fc;  // affine output
  diff::Var af;  // after ReLU
  diff::Var bn;  // after batchnorm (layer output)

  diff::Var at(TapPosition tap) const;
};

struct ForwardRecord {
  diff::Var logits;                                   // [N x S]
  std::array<EmbeddingTaps, kNumEmbeddingLayers> taps;  // l6, l7
  diff::Var classifier_input;                         // l7 output, f(x) of the GTM posterior
  diff::Var theta;                                    // classifier weights [E x S]
  diff::Var xvector;                                  // l6 affine output
};

struct NamedParameter {
  std::string name;
  diff::Tensor *tensor;
};

/// The x-vector network: five dilated TDNN layers (conv -> ReLU ->
/// batchnorm), statistics pooling, two embedding layers (affine -> ReLU ->
/// batchnorm), a speaker classifier, and optional per-layer projections for
/// the Gaussian-noise auxiliary task.
class XvectorModel {
 public:
  /// Parameters are drawn deterministically from `seed`. The primary network
  /// consumes its own stream, so attaching auxiliary branches never changes
  /// the primary initialization.
  static XvectorModel Build(const ModelSpec &spec, std::optional<AuxBranchSpec> aux, std::uint64_t seed);

  const ModelSpec &spec() const { return spec_; }
  const std::optional<AuxBranchSpec> &aux() const { return aux_; }
  std::uint64_t seed() const { return seed_; }

  /// `batch` is [N x T x D] (or [T x D] for a single utterance).
  ForwardRecord Forward(diff::Graph &g, const diff::Tensor &batch, diff::Mode mode, bool update_stats = true);

  /// Eval-mode l6 affine output for one [T x D] utterance. Classifier, l7
  /// and auxiliary branches are not evaluated.
  diff::Tensor ExtractEmbedding(const diff::Tensor &frames) const;

  /// F1: W^l v + b^l. F0: v unchanged. Requires an attached branch.
  diff::Var AuxProject(diff::Graph &g, diff::Var tapped, std::size_t layer);

  /// Dimension of the tapped vector for embedding layer `layer`.
  std::size_t TapDim(std::size_t layer) const;
  /// Dimension of the auxiliary output (and of its noise target).
  std::size_t NoiseDim(std::size_t layer) const;
  std::size_t embedding_dim() const { return spec_.embed_dims[0]; }

  std::vector<NamedParameter> NamedParameters();
  std::vector<diff::Tensor *> Parameters();
  /// Parameters of the primary network only (no auxiliary projections).
  std::vector<diff::Tensor *> PrimaryParameters();
  std::size_t NumParameters() const;
  void ZeroGrad();

  const diff::Tensor &classifier_weights() const { return theta_; }
  diff::Tensor &classifier_weights() { return theta_; }

  /// FNV-1a over every parameter and running statistic.
  std::uint64_t StateHash() const;

  void Write(BinaryWriter &out) const;
  static XvectorModel Read(BinaryReader &in);

 private:
  struct FrameLayer {
    diff::Tensor kernel;  // [k x Din x Dout]
    diff::Tensor bias;
    diff::BatchNorm bn;
    std::size_t dilation = 1;
  };
  struct EmbedLayer {
    diff::Tensor weight;  // [Din x Dout]
    diff::Tensor bias;
    diff::BatchNorm bn;
  };
  struct Projection {
    diff::Tensor weight;  // [tap dim x projection dim]
    diff::Tensor bias;
  };

  template <typename Self>
  static diff::Var RunFrames(Self &self, diff::Graph &g, diff::Var x, diff::Mode mode, bool update_stats);

  void CheckInput(const diff::Tensor &batch) const;

  ModelSpec spec_;
  std::optional<AuxBranchSpec> aux_;
  std::uint64_t seed_ = 0;
  std::vector<FrameLayer> frames_;
  std::vector<EmbedLayer> embeds_;
  diff::Tensor theta_;
  std::optional<diff::Tensor> classifier_bias_;
  std::vector<Projection> projections_;
};

}  // namespace xvec

#endif  // XVEC_MODEL_XVECTOR_MODEL_H_
