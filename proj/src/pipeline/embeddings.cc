// src/pipeline/embeddings.cc

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

#include "xvec/pipeline/embeddings.h"

#include <map>
#include <string_view>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"

namespace xvec {

namespace {
constexpr std::string_view kMagic = "XVEM";
}  // namespace

std::vector<int> EmbeddingSet::SpeakerLabels() const {
  std::map<std::string, int> index;
  for (const std::string &s : speaker_ids) index.emplace(s, 0);
  int next = 0;
  for (auto &[name, label] : index) label = next++;
  std::vector<int> labels;
  labels.reserve(speaker_ids.size());
  for (const std::string &s : speaker_ids) labels.push_back(index.at(s));
  return labels;
}

std::size_t EmbeddingSet::IndexOf(const std::string &utterance_id) const {
  for (std::size_t i = 0; i < utterance_ids.size(); ++i)
    if (utterance_ids[i] == utterance_id) return i;
  throw DataError("no embedding for utterance '" + utterance_id + "'");
}

EmbeddingSet ExtractEmbeddings(const XvectorModel &model, std::span<const FeatureSequence> sequences) {
  EmbeddingSet out;
  const std::size_t dim = model.embedding_dim();
  out.vectors.resize(static_cast<Eigen::Index>(sequences.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const FeatureSequence &seq = sequences[i];
    if (seq.num_frames < model.spec().min_frames())
      throw InputLengthError("utterance '" + seq.utterance_id + "' has " + std::to_string(seq.num_frames) +
                             " frames; the network needs at least " + std::to_string(model.spec().min_frames()));
    diff::Tensor e = model.ExtractEmbedding(seq.ToTensor());
    if (e.size() != dim) throw DimensionError("embedding size mismatch for '" + seq.utterance_id + "'");
    for (std::size_t j = 0; j < dim; ++j) out.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e[j];
    out.utterance_ids.push_back(seq.utterance_id);
    out.speaker_ids.push_back(seq.speaker_id);
  }
  return out;
}

std::string EncodeEmbeddings(const EmbeddingSet &set) {
  if (set.speaker_ids.size() != set.size() || static_cast<std::size_t>(set.vectors.rows()) != set.size())
    throw DimensionError("embedding set has inconsistent sizes");
  BinaryWriter w;
  w.WriteBytes(kMagic);
  w.WriteU32(kEmbeddingsVersion);
  w.WriteU64(set.size());
  w.WriteU64(set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    w.WriteString(set.utterance_ids[i]);
    w.WriteString(set.speaker_ids[i]);
    for (std::size_t j = 0; j < set.dim(); ++j)
      w.WriteF64(set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  BinaryWriter trailer;
  trailer.WriteU64(Fnv1a64(w.buffer()));
  return w.buffer() + trailer.buffer();
}

EmbeddingSet DecodeEmbeddings(const std::string &bytes, const std::string &source) {
  if (bytes.size() < kMagic.size() + 4 + 16 + 8)
    throw FormatError(source + ": embedding file too short (" + std::to_string(bytes.size()) + " bytes)");
  BinaryReader tail(bytes.substr(bytes.size() - 8), source);
  const std::string body = bytes.substr(0, bytes.size() - 8);
  if (Fnv1a64(body) != tail.ReadU64()) throw FormatError(source + ": embedding file checksum mismatch");
  BinaryReader in(body, source);
  in.ExpectMagic(kMagic);
  const std::uint32_t version = in.ReadU32();
  if (version != kEmbeddingsVersion)
    throw FormatError(source + ": unsupported embedding file version " + std::to_string(version));
  const std::uint64_t count = in.ReadU64(), dim = in.ReadU64();
  if (dim == 0 || count > in.remaining() / (8 + dim * 8))
    throw FormatError(source + ": implausible header (count " + std::to_string(count) + ", dim " +
                      std::to_string(dim) + ")");
  EmbeddingSet set;
  set.vectors.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < count; ++i) {
    set.utterance_ids.push_back(in.ReadString());
    set.speaker_ids.push_back(in.ReadString());
    for (std::uint64_t j = 0; j < dim; ++j)
      set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = in.ReadF64();
  }
  if (!in.AtEnd()) throw FormatError(source + ": " + std::to_string(in.remaining()) + " trailing bytes");
  return set;
}

void WriteEmbeddings(const std::string &path, const EmbeddingSet &set) { WriteFileBytes(path, EncodeEmbeddings(set)); }

EmbeddingSet ReadEmbeddings(const std::string &path) { return DecodeEmbeddings(ReadFileBytes(path), path); }

}  // namespace xvec
