// include/xvec/corpus/synthetic.h

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

#ifndef XVEC_CORPUS_SYNTHETIC_H_
#define XVEC_CORPUS_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "xvec/corpus/features.h"

namespace xvec {

/// Shape of the synthetic "acoustic" world. Frames are drawn from a shared
/// mixture of phone Gaussians, passed through a per-speaker linear map and
/// offset, then shifted by a per-utterance channel offset plus frame noise.
struct SyntheticWorld {
  std::size_t dim = 30;
  std::size_t num_phones = 12;
  double phone_spread = 2.0;      // std of phone means
  double speaker_transform = 0.25;  // scale of the per-speaker map perturbation
  double speaker_offset = 0.6;    // std of per-speaker offsets
  double channel_offset = 0.3;    // std of per-utterance offsets
  double frame_noise = 0.3;
  std::size_t min_segment = 3;    // phone segment length range, frames
  std::size_t max_segment = 12;
};

/// Draws `num_speakers` speakers named `<prefix>spkNNN` with
/// `utts_per_speaker` utterances each, lengths uniform in
/// [min_frames, max_frames]. Output depends only on (world, seed, ids).
std::vector<FeatureSequence> GenerateSpeakers(const SyntheticWorld &world, std::size_t num_speakers,
                                              std::size_t utts_per_speaker, std::size_t min_frames,
                                              std::size_t max_frames, std::uint64_t seed, const std::string &prefix);

struct SyntheticCorpusOptions {
  SyntheticWorld world;
  std::size_t train_speakers = 50;
  std::size_t train_utts_per_speaker = 10;
  std::size_t validation_utts_per_speaker = 2;
  std::size_t eval_speakers = 20;
  std::size_t eval_utts_per_speaker = 8;
  std::size_t enroll_utts_per_speaker = 2;
  std::size_t min_frames = 200;
  std::size_t max_frames = 400;
  std::uint64_t seed = 1;
};

/// Train and validation share the training speakers; enroll and test share
/// a disjoint set of evaluation speakers.
struct SyntheticCorpus {
  std::vector<FeatureSequence> train;
  std::vector<FeatureSequence> validation;
  std::vector<FeatureSequence> enroll;
  std::vector<FeatureSequence> test;
};

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusOptions &options);

/// Writes `<split>.farc` and `<split>.manifest` for every split plus a
/// `trials` file pairing every enroll utterance with every test utterance.
void WriteSyntheticCorpus(const std::string &dir, const SyntheticCorpus &corpus);

}  // namespace xvec

#endif  // XVEC_CORPUS_SYNTHETIC_H_
