// src/corpus/noise-targets.cc

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

#include "xvec/corpus/noise-targets.h"

#include <sstream>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"

namespace xvec {

NoiseTargetSource::NoiseTargetSource(std::uint64_t seed, NoiseMode mode, std::vector<std::size_t> layer_dims)
    : seed_(seed), mode_(mode), dims_(std::move(layer_dims)), rng_(seed ^ 0xD1B54A32D192ED03ULL) {}

std::size_t NoiseTargetSource::dim(std::size_t layer) const {
  if (layer >= dims_.size() || dims_[layer] == 0)
    throw ConfigError("noise targets: layer " + std::to_string(layer) + " is not configured");
  return dims_[layer];
}

std::vector<double> NoiseTargetSource::TargetFor(std::string_view utterance_id, std::size_t layer) {
  const std::size_t d = dim(layer);
  std::vector<double> out(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (mode_ == NoiseMode::kFixedPerUtterance) {
    BinaryWriter key;
    key.WriteU64(seed_);
    key.WriteString(utterance_id);
    key.WriteU64(layer);
    std::mt19937_64 gen(Fnv1a64(key.buffer()));
    for (double &v : out) v = normal(gen);
  } else {
    for (double &v : out) v = normal(rng_);
  }
  return out;
}

diff::Tensor NoiseTargetSource::BatchTargets(std::span<const std::string> utterance_ids, std::size_t layer) {
  const std::size_t d = dim(layer);
  diff::Tensor out(diff::Shape{utterance_ids.size(), d});
  for (std::size_t n = 0; n < utterance_ids.size(); ++n) {
    auto v = TargetFor(utterance_ids[n], layer);
    std::copy(v.begin(), v.end(), out.values().begin() + static_cast<std::ptrdiff_t>(n * d));
  }
  return out;
}

std::string NoiseTargetSource::SaveState() const {
  std::ostringstream s;
  s << rng_;
  return s.str();
}

void NoiseTargetSource::LoadState(const std::string &state) {
  std::istringstream s(state);
  s >> rng_;
  if (!s) throw FormatError("noise targets: corrupt generator state");
}

}  // namespace xvec
