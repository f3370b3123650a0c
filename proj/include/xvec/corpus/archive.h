// include/xvec/corpus/archive.h

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

#ifndef XVEC_CORPUS_ARCHIVE_H_
#define XVEC_CORPUS_ARCHIVE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xvec/base/binary-io.h"
#include "xvec/corpus/features.h"

namespace xvec {

// Feature archive layout (little-endian):
//   "FARC" u32:version
//   repeated { u32:key_len key u32:T u32:D f32[T*D] row-major }

inline constexpr std::uint32_t kArchiveVersion = 1;

/// Serializes `sequences` and returns the byte offset of each record.
std::string EncodeArchive(std::span<const FeatureSequence> sequences, std::vector<std::uint64_t> *offsets);
/// Writes an archive atomically; returns per-record byte offsets.
std::vector<std::uint64_t> WriteArchive(const std::string &path, std::span<const FeatureSequence> sequences);

/// Random-access reader over an archive held in memory. Speaker ids are not
/// stored in the archive and come back empty.
class ArchiveReader {
 public:
  explicit ArchiveReader(const std::string &path);
  static ArchiveReader FromBytes(std::string bytes, std::string source);

  FeatureSequence ReadAt(std::uint64_t offset);
  std::vector<FeatureSequence> ReadAll();

 private:
  ArchiveReader(BinaryReader reader);
  FeatureSequence ReadRecord();

  BinaryReader reader_;
  std::size_t data_start_ = 0;
};

std::vector<FeatureSequence> ReadArchive(const std::string &path);

/// Loads every manifest entry from the archive, attaching speaker ids.
std::vector<FeatureSequence> LoadSplit(const std::string &archive_path, const CorpusManifest &manifest);

}  // namespace xvec

#endif  // XVEC_CORPUS_ARCHIVE_H_
