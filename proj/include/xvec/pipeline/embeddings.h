// include/xvec/pipeline/embeddings.h

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

#ifndef XVEC_PIPELINE_EMBEDDINGS_H_
#define XVEC_PIPELINE_EMBEDDINGS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xvec/backend/backend.h"
#include "xvec/corpus/features.h"
#include "xvec/model/xvector-model.h"

namespace xvec {

/// Utterance embeddings with their identities; row i of `vectors` belongs to
/// utterance_ids[i].
struct EmbeddingSet {
  std::vector<std::string> utterance_ids;
  std::vector<std::string> speaker_ids;
  EmbeddingMatrix vectors;

  std::size_t size() const { return utterance_ids.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  /// Dense speaker labels in sorted speaker-id order.
  std::vector<int> SpeakerLabels() const;
  /// Row of `utterance_id`; DataError when absent.
  std::size_t IndexOf(const std::string &utterance_id) const;
};

/// Eval-mode embedding of every whole utterance, in input order.
EmbeddingSet ExtractEmbeddings(const XvectorModel &model, std::span<const FeatureSequence> sequences);

/// "XVEM" container: u32 version, u64 count, u64 dim, then per record the
/// utterance id, speaker id and `dim` f64 values, followed by an FNV-1a
/// checksum of everything before it.
std::string EncodeEmbeddings(const EmbeddingSet &set);
EmbeddingSet DecodeEmbeddings(const std::string &bytes, const std::string &source);
void WriteEmbeddings(const std::string &path, const EmbeddingSet &set);
EmbeddingSet ReadEmbeddings(const std::string &path);

inline constexpr std::uint32_t kEmbeddingsVersion = 1;

}  // namespace xvec

#endif  // XVEC_PIPELINE_EMBEDDINGS_H_
