// include/xvec/corpus/features.h

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

#ifndef XVEC_CORPUS_FEATURES_H_
#define XVEC_CORPUS_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xvec/diff/tensor.h"

namespace xvec {

/// A T x D frame matrix with its utterance and speaker identity.
struct FeatureSequence {
  std::string utterance_id;
  std::string speaker_id;
  std::size_t num_frames = 0;
  std::size_t dim = 0;
  std::vector<float> frames;  // row-major T x D

  float at(std::size_t t, std::size_t d) const { return frames[t * dim + d]; }
  /// Throws DataError unless T >= 1, sizes agree and all values are finite.
  void Validate() const;
  /// [T x D] tensor; `max_frames` > 0 keeps only the first max_frames frames.
  diff::Tensor ToTensor(std::size_t max_frames = 0) const;

  bool operator==(const FeatureSequence &) const = default;
};

enum class Split { kTrain, kValidation, kEnroll, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::uint64_t offset = 0;

  bool operator==(const ManifestEntry &) const = default;
};

struct CorpusManifest {
  Split split = Split::kTrain;
  std::vector<ManifestEntry> entries;

  /// Sorted, unique speaker ids.
  std::vector<std::string> Speakers() const;
  /// Throws DataError on duplicate utterance ids.
  void Validate() const;
};

/// `<utterance-id> <speaker-id> <byte-offset>` per line.
void WriteManifest(const std::string &path, const CorpusManifest &manifest);
CorpusManifest ReadManifest(const std::string &path, Split split);

/// Throws DataError if any utterance id appears in two manifests.
void CheckDisjoint(std::span<const CorpusManifest> manifests);

/// Maps speaker ids to dense class indices in sorted order.
std::map<std::string, int> SpeakerIndex(std::span<const FeatureSequence> sequences);

}  // namespace xvec

#endif  // XVEC_CORPUS_FEATURES_H_
