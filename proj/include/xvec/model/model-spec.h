// include/xvec/model/model-spec.h

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

#ifndef XVEC_MODEL_MODEL_SPEC_H_
#define XVEC_MODEL_MODEL_SPEC_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xvec/base/binary-io.h"

namespace xvec {

struct FrameLayerSpec {
  std::size_t out_dim = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;

  bool operator==(const FrameLayerSpec &) const = default;
};

/// Layer dimensions of the x-vector network. Defaults are the standard
/// five-TDNN-layer configuration over 30-dim features.
struct ModelSpec {
  std::size_t feature_dim = 30;
  std::vector<FrameLayerSpec> frame_layers = {
      {512, 5, 1}, {512, 3, 2}, {512, 3, 3}, {512, 1, 1}, {1536, 1, 1}};
  std::vector<std::size_t> embed_dims = {512, 512};
  std::size_t num_speakers = 0;
  bool classifier_bias = true;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;

  /// Throws ConfigError unless there are 5 frame layers, 2 embedding layers
  /// and all dimensions are positive.
  void Validate() const;
  /// Frames consumed by the convolution stack (14 for the default spec).
  std::size_t context() const;
  std::size_t min_frames() const { return context() + 1; }
  std::size_t pooled_dim() const { return 2 * frame_layers.back().out_dim; }

  bool operator==(const ModelSpec &) const = default;
};

enum class AuxMode { kF0, kF1 };
/// Where inside an embedding layer (affine -> ReLU -> batchnorm) the
/// auxiliary branch reads its input.
enum class TapPosition { kIn = 0, kFc = 1, kAf = 2, kBn = 3 };
enum class NoiseMode { kFixedPerUtterance, kResampledPerBatch };
/// kSquared uses ||.||^2 in the regularizers; kLiteral uses ||.||.
enum class NormConvention { kSquared, kLiteral };

/// Gaussian-noise auxiliary task attached to both embedding layers.
struct AuxBranchSpec {
  AuxMode mode = AuxMode::kF1;
  TapPosition tap = TapPosition::kFc;
  std::size_t projection_dim = 100;
  double lambda = 0.1;
  NoiseMode noise_mode = NoiseMode::kFixedPerUtterance;
  NormConvention norm = NormConvention::kSquared;

  bool operator==(const AuxBranchSpec &) const = default;
};

enum class Objective { kBaseline, kGtm, kGncn };

/// A named system variant: training objective plus the wiring it needs.
struct SystemConfig {
  std::string name = "x-vector";
  Objective objective = Objective::kBaseline;
  double gtm_alpha = 0.05;
  NormConvention gtm_norm = NormConvention::kSquared;
  std::optional<AuxBranchSpec> aux;

  bool operator==(const SystemConfig &) const = default;
};

/// Presets: "x-vector", "GTM", "GNCN-F0-<TAP>", "GNCN-F1-<TAP>" with TAP one
/// of IN, FC, AF, BN. Throws ConfigError for anything else.
SystemConfig SystemPreset(std::string_view name);
/// Applies the preset's constraints to a spec (GTM has no classifier bias).
ModelSpec SpecForSystem(ModelSpec spec, const SystemConfig &system);

std::string_view TapName(TapPosition tap);
TapPosition ParseTap(std::string_view s);
std::string_view AuxModeName(AuxMode mode);
AuxMode ParseAuxMode(std::string_view s);
std::string_view NoiseModeName(NoiseMode mode);
NoiseMode ParseNoiseMode(std::string_view s);
std::string_view NormName(NormConvention norm);
NormConvention ParseNorm(std::string_view s);
std::string_view ObjectiveName(Objective objective);

void WriteModelSpec(BinaryWriter &out, const ModelSpec &spec);
ModelSpec ReadModelSpec(BinaryReader &in);
void WriteSystemConfig(BinaryWriter &out, const SystemConfig &system);
SystemConfig ReadSystemConfig(BinaryReader &in);

}  // namespace xvec

#endif  // XVEC_MODEL_MODEL_SPEC_H_
