// include/xvec/corpus/batching.h

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

#ifndef XVEC_CORPUS_BATCHING_H_
#define XVEC_CORPUS_BATCHING_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xvec/corpus/features.h"
#include "xvec/diff/tensor.h"

namespace xvec {

/// Shortest crop accepted anywhere; equals the default network's receptive
/// field.
inline constexpr std::size_t kMinCropFrames = 15;

/// Contiguous window of `crop_len` frames at a uniform random start.
FeatureSequence SampleCrop(const FeatureSequence &seq, std::size_t crop_len, std::mt19937_64 &rng);

struct BatchingOptions {
  std::size_t batch_size = 32;
  std::size_t min_crop = 200;  // 2 s at a 10 ms frame shift
  std::size_t max_crop = 400;  // 4 s
};

/// One planned mini-batch: which sequences, the shared crop length, and
/// each crop's start frame.
struct BatchPlan {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> starts;
  std::size_t crop_len = 0;
};

struct EpochPlan {
  std::vector<BatchPlan> batches;
  std::size_t skipped = 0;  // sequences shorter than min_crop
};

/// Shuffles the eligible sequences and cuts them into batches of exactly
/// batch_size; the final batch is topped up from the start of the shuffled
/// order. Each batch draws one crop length uniformly from
/// [min_crop, max_crop] (capped by its shortest member).
EpochPlan MakeBatches(std::span<const FeatureSequence> sequences, const BatchingOptions &options,
                      std::mt19937_64 &rng);

struct Batch {
  diff::Tensor features;  // [N x T x D]
  std::vector<int> labels;
  std::vector<std::string> utterance_ids;
};

Batch AssembleBatch(const BatchPlan &plan, std::span<const FeatureSequence> sequences, std::span<const int> labels);

/// Stacks equal-length sequences into [N x T x D]; BatchError otherwise.
diff::Tensor StackSequences(std::span<const FeatureSequence> sequences);

}  // namespace xvec

#endif  // XVEC_CORPUS_BATCHING_H_
