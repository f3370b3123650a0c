// src/corpus/batching.cc

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

#include "xvec/corpus/batching.h"

#include <algorithm>
#include <numeric>

#include "xvec/base/error.h"

namespace xvec {

FeatureSequence SampleCrop(const FeatureSequence &seq, std::size_t crop_len, std::mt19937_64 &rng) {
  if (crop_len < kMinCropFrames)
    throw InputLengthError("crop of " + std::to_string(crop_len) + " frames is below the " +
                           std::to_string(kMinCropFrames) + "-frame minimum");
  if (crop_len > seq.num_frames)
    throw InputLengthError("crop of " + std::to_string(crop_len) + " frames exceeds " + seq.utterance_id + " (" +
                           std::to_string(seq.num_frames) + " frames)");
  std::uniform_int_distribution<std::size_t> start_dist(0, seq.num_frames - crop_len);
  const std::size_t start = start_dist(rng);
  FeatureSequence out;
  out.utterance_id = seq.utterance_id;
  out.speaker_id = seq.speaker_id;
  out.dim = seq.dim;
  out.num_frames = crop_len;
  out.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start * seq.dim),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>((start + crop_len) * seq.dim));
  return out;
}

EpochPlan MakeBatches(std::span<const FeatureSequence> sequences, const BatchingOptions &o, std::mt19937_64 &rng) {
  if (o.batch_size < 2) throw ConfigError("batching: batch_size must be at least 2");
  if (o.min_crop < kMinCropFrames || o.min_crop > o.max_crop)
    throw ConfigError("batching: invalid crop range [" + std::to_string(o.min_crop) + "," +
                      std::to_string(o.max_crop) + "]");
  EpochPlan plan;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].num_frames < o.min_crop)
      ++plan.skipped;
    else
      order.push_back(i);
  }
  if (plan.skipped > 0)
    Warn("batching: skipped " + std::to_string(plan.skipped) + " sequences shorter than " +
         std::to_string(o.min_crop) + " frames");
  if (order.size() < 2) throw DataError("batching: fewer than 2 sequences long enough to batch");
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_int_distribution<std::size_t> crop_dist(o.min_crop, o.max_crop);
  const std::size_t num_batches = (order.size() + o.batch_size - 1) / o.batch_size;
  for (std::size_t b = 0; b < num_batches; ++b) {
    BatchPlan bp;
    for (std::size_t k = 0; k < o.batch_size; ++k) bp.indices.push_back(order[(b * o.batch_size + k) % order.size()]);
    std::size_t shortest = sequences[bp.indices[0]].num_frames;
    for (std::size_t i : bp.indices) shortest = std::min(shortest, sequences[i].num_frames);
    bp.crop_len = std::min(crop_dist(rng), shortest);
    for (std::size_t i : bp.indices) {
      std::uniform_int_distribution<std::size_t> start(0, sequences[i].num_frames - bp.crop_len);
      bp.starts.push_back(start(rng));
    }
    plan.batches.push_back(std::move(bp));
  }
  return plan;
}

Batch AssembleBatch(const BatchPlan &plan, std::span<const FeatureSequence> sequences, std::span<const int> labels) {
  if (plan.indices.empty()) throw BatchError("empty batch plan");
  const std::size_t n = plan.indices.size(), t = plan.crop_len;
  const std::size_t d = sequences[plan.indices[0]].dim;
  Batch batch;
  batch.features = diff::Tensor(diff::Shape{n, t, d});
  double *dst = batch.features.data();
  for (std::size_t k = 0; k < n; ++k) {
    const FeatureSequence &seq = sequences[plan.indices[k]];
    if (seq.dim != d) throw BatchError("batch mixes feature dimensions");
    if (plan.starts[k] + t > seq.num_frames) throw BatchError("crop runs past the end of " + seq.utterance_id);
    const float *src = seq.frames.data() + plan.starts[k] * d;
    for (std::size_t i = 0; i < t * d; ++i) *dst++ = src[i];
    batch.labels.push_back(labels.empty() ? -1 : labels[plan.indices[k]]);
    batch.utterance_ids.push_back(seq.utterance_id);
  }
  return batch;
}

diff::Tensor StackSequences(std::span<const FeatureSequence> sequences) {
  if (sequences.empty()) throw BatchError("cannot stack an empty set of sequences");
  const std::size_t t = sequences[0].num_frames, d = sequences[0].dim;
  diff::Tensor out(diff::Shape{sequences.size(), t, d});
  double *dst = out.data();
  for (const auto &s : sequences) {
    if (s.num_frames != t || s.dim != d)
      throw BatchError("batch mixes lengths: " + s.utterance_id + " is " + std::to_string(s.num_frames) + "x" +
                       std::to_string(s.dim) + ", expected " + std::to_string(t) + "x" + std::to_string(d));
    for (float v : s.frames) *dst++ = v;
  }
  return out;
}

}  // namespace xvec
