// src/model/model-spec.cc

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

#include "xvec/model/model-spec.h"

#include <array>
#include <utility>

#include "xvec/base/error.h"

namespace xvec {

void ModelSpec::Validate() const {
  if (feature_dim == 0) throw ConfigError("model: feature_dim must be positive");
  if (frame_layers.size() != 5)
    throw ConfigError("model: expected 5 frame layers, got " + std::to_string(frame_layers.size()));
  if (embed_dims.size() != 2)
    throw ConfigError("model: expected 2 embedding layers, got " + std::to_string(embed_dims.size()));
  for (std::size_t i = 0; i < frame_layers.size(); ++i) {
    const auto &l = frame_layers[i];
    if (l.out_dim == 0 || l.kernel == 0 || l.dilation == 0)
      throw ConfigError("model: frame layer " + std::to_string(i + 1) + " has a zero dimension");
  }
  for (std::size_t d : embed_dims)
    if (d == 0) throw ConfigError("model: embedding dimensions must be positive");
  if (num_speakers < 2) throw ConfigError("model: need at least 2 speakers, got " + std::to_string(num_speakers));
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) throw ConfigError("model: bn_momentum must lie in (0,1)");
  if (!(bn_epsilon > 0.0)) throw ConfigError("model: bn_epsilon must be positive");
}

std::size_t ModelSpec::context() const {
  std::size_t c = 0;
  for (const auto &l : frame_layers) c += (l.kernel - 1) * l.dilation;
  return c;
}

namespace {

constexpr std::array<std::pair<TapPosition, std::string_view>, 4> kTaps = {
    {{TapPosition::kIn, "IN"}, {TapPosition::kFc, "FC"}, {TapPosition::kAf, "AF"}, {TapPosition::kBn, "BN"}}};

}  // namespace

std::string_view TapName(TapPosition tap) {
  for (auto [t, n] : kTaps)
    if (t == tap) return n;
  return "?";
}

TapPosition ParseTap(std::string_view s) {
  for (auto [t, n] : kTaps)
    if (n == s) return t;
  throw ConfigError("unknown tap position '" + std::string(s) + "' (expected IN, FC, AF or BN)");
}

std::string_view AuxModeName(AuxMode mode) { return mode == AuxMode::kF0 ? "F0" : "F1"; }

AuxMode ParseAuxMode(std::string_view s) {
  if (s == "F0") return AuxMode::kF0;
  if (s == "F1") return AuxMode::kF1;
  throw ConfigError("unknown auxiliary mode '" + std::string(s) + "' (expected F0 or F1)");
}

std::string_view NoiseModeName(NoiseMode mode) {
  return mode == NoiseMode::kFixedPerUtterance ? "fixed" : "resampled";
}

NoiseMode ParseNoiseMode(std::string_view s) {
  if (s == "fixed") return NoiseMode::kFixedPerUtterance;
  if (s == "resampled") return NoiseMode::kResampledPerBatch;
  throw ConfigError("unknown noise mode '" + std::string(s) + "' (expected fixed or resampled)");
}

std::string_view NormName(NormConvention norm) { return norm == NormConvention::kSquared ? "squared" : "literal"; }

NormConvention ParseNorm(std::string_view s) {
  if (s == "squared") return NormConvention::kSquared;
  if (s == "literal") return NormConvention::kLiteral;
  throw ConfigError("unknown norm convention '" + std::string(s) + "' (expected squared or literal)");
}

std::string_view ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kBaseline: return "baseline";
    case Objective::kGtm: return "gtm";
    case Objective::kGncn: return "gncn";
  }
  return "?";
}

SystemConfig SystemPreset(std::string_view name) {
  SystemConfig sys;
  sys.name = std::string(name);
  if (name == "x-vector") return sys;
  if (name == "GTM") {
    sys.objective = Objective::kGtm;
    return sys;
  }
  // GNCN-F<0|1>-<TAP>
  if (name.size() == 10 && name.substr(0, 5) == "GNCN-" && name[7] == '-') {
    AuxBranchSpec aux;
    aux.mode = ParseAuxMode(name.substr(5, 2));
    aux.tap = ParseTap(name.substr(8));
    sys.objective = Objective::kGncn;
    sys.aux = aux;
    return sys;
  }
  throw ConfigError("unknown system '" + std::string(name) +
                    "' (expected x-vector, GTM, GNCN-F0-<TAP> or GNCN-F1-<TAP>)");
}

ModelSpec SpecForSystem(ModelSpec spec, const SystemConfig &system) {
  if (system.objective == Objective::kGtm) spec.classifier_bias = false;
  return spec;
}

void WriteModelSpec(BinaryWriter &out, const ModelSpec &spec) {
  out.WriteU64(spec.feature_dim);
  out.WriteU64(spec.frame_layers.size());
  for (const auto &l : spec.frame_layers) {
    out.WriteU64(l.out_dim);
    out.WriteU64(l.kernel);
    out.WriteU64(l.dilation);
  }
  out.WriteU64(spec.embed_dims.size());
  for (std::size_t d : spec.embed_dims) out.WriteU64(d);
  out.WriteU64(spec.num_speakers);
  out.WriteU32(spec.classifier_bias ? 1 : 0);
  out.WriteF64(spec.bn_momentum);
  out.WriteF64(spec.bn_epsilon);
}

ModelSpec ReadModelSpec(BinaryReader &in) {
  ModelSpec spec;
  spec.feature_dim = in.ReadU64();
  std::uint64_t nf = in.ReadU64();
  if (nf > 64) throw FormatError(in.source() + ": implausible frame layer count " + std::to_string(nf));
  spec.frame_layers.resize(nf);
  for (auto &l : spec.frame_layers) {
    l.out_dim = in.ReadU64();
    l.kernel = in.ReadU64();
    l.dilation = in.ReadU64();
  }
  std::uint64_t ne = in.ReadU64();
  if (ne > 64) throw FormatError(in.source() + ": implausible embedding layer count " + std::to_string(ne));
  spec.embed_dims.resize(ne);
  for (auto &d : spec.embed_dims) d = in.ReadU64();
  spec.num_speakers = in.ReadU64();
  spec.classifier_bias = in.ReadU32() != 0;
  spec.bn_momentum = in.ReadF64();
  spec.bn_epsilon = in.ReadF64();
  return spec;
}

void WriteSystemConfig(BinaryWriter &out, const SystemConfig &system) {
  out.WriteString(system.name);
  out.WriteU32(static_cast<std::uint32_t>(system.objective));
  out.WriteF64(system.gtm_alpha);
  out.WriteU32(static_cast<std::uint32_t>(system.gtm_norm));
  out.WriteU32(system.aux ? 1 : 0);
  if (system.aux) {
    const auto &a = *system.aux;
    out.WriteU32(static_cast<std::uint32_t>(a.mode));
    out.WriteU32(static_cast<std::uint32_t>(a.tap));
    out.WriteU64(a.projection_dim);
    out.WriteF64(a.lambda);
    out.WriteU32(static_cast<std::uint32_t>(a.noise_mode));
    out.WriteU32(static_cast<std::uint32_t>(a.norm));
  }
}

SystemConfig ReadSystemConfig(BinaryReader &in) {
  auto enum_field = [&](std::uint32_t max, const char *what) {
    std::size_t at = in.offset();
    std::uint32_t v = in.ReadU32();
    if (v > max)
      throw FormatError(in.source() + ": invalid " + what + " " + std::to_string(v) + " at byte offset " +
                        std::to_string(at));
    return v;
  };
  SystemConfig sys;
  sys.name = in.ReadString();
  sys.objective = static_cast<Objective>(enum_field(2, "objective"));
  sys.gtm_alpha = in.ReadF64();
  sys.gtm_norm = static_cast<NormConvention>(enum_field(1, "norm convention"));
  if (enum_field(1, "aux flag")) {
    AuxBranchSpec a;
    a.mode = static_cast<AuxMode>(enum_field(1, "aux mode"));
    a.tap = static_cast<TapPosition>(enum_field(3, "tap position"));
    a.projection_dim = in.ReadU64();
    a.lambda = in.ReadF64();
    a.noise_mode = static_cast<NoiseMode>(enum_field(1, "noise mode"));
    a.norm = static_cast<NormConvention>(enum_field(1, "norm convention"));
    sys.aux = a;
  }
  return sys;
}

}  // namespace xvec
