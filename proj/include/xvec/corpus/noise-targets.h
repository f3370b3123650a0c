// include/xvec/corpus/noise-targets.h

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

#ifndef XVEC_CORPUS_NOISE_TARGETS_H_
#define XVEC_CORPUS_NOISE_TARGETS_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xvec/diff/tensor.h"
#include "xvec/model/model-spec.h"

namespace xvec {

/// Standard-normal regression targets for the auxiliary task, one vector per
/// (utterance, embedding layer).
///
/// Fixed mode: the target is a pure function of (seed, utterance id, layer),
/// so an utterance sees the same target in every epoch and every process.
/// Resampled mode: every call draws fresh values from an internal generator.
class NoiseTargetSource {
 public:
  NoiseTargetSource(std::uint64_t seed, NoiseMode mode, std::vector<std::size_t> layer_dims);

  std::vector<double> TargetFor(std::string_view utterance_id, std::size_t layer);
  /// [N x dim(layer)] targets for a batch.
  diff::Tensor BatchTargets(std::span<const std::string> utterance_ids, std::size_t layer);

  NoiseMode mode() const { return mode_; }
  std::size_t dim(std::size_t layer) const;

  /// Generator state of the resampled mode, for checkpointing.
  std::string SaveState() const;
  void LoadState(const std::string &state);

 private:
  std::uint64_t seed_;
  NoiseMode mode_;
  std::vector<std::size_t> dims_;
  std::mt19937_64 rng_;
};

}  // namespace xvec

#endif  // XVEC_CORPUS_NOISE_TARGETS_H_
