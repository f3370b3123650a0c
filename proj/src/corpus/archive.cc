// src/corpus/archive.cc

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

#include "xvec/corpus/archive.h"

#include "xvec/base/error.h"

namespace xvec {

std::string EncodeArchive(std::span<const FeatureSequence> sequences, std::vector<std::uint64_t> *offsets) {
  BinaryWriter w;
  w.WriteBytes("FARC");
  w.WriteU32(kArchiveVersion);
  if (offsets) offsets->clear();
  for (const auto &seq : sequences) {
    seq.Validate();
    if (offsets) offsets->push_back(w.size());
    w.WriteString(seq.utterance_id);
    w.WriteU32(static_cast<std::uint32_t>(seq.num_frames));
    w.WriteU32(static_cast<std::uint32_t>(seq.dim));
    for (float v : seq.frames) w.WriteF32(v);
  }
  return w.buffer();
}

std::vector<std::uint64_t> WriteArchive(const std::string &path, std::span<const FeatureSequence> sequences) {
  std::vector<std::uint64_t> offsets;
  std::string bytes = EncodeArchive(sequences, &offsets);
  WriteFileBytes(path, bytes);
  return offsets;
}

ArchiveReader::ArchiveReader(BinaryReader reader) : reader_(std::move(reader)) {
  reader_.ExpectMagic("FARC");
  std::size_t at = reader_.offset();
  std::uint32_t version = reader_.ReadU32();
  if (version != kArchiveVersion)
    throw FormatError(reader_.source() + ": unsupported archive version " + std::to_string(version) +
                      " at byte offset " + std::to_string(at));
  data_start_ = reader_.offset();
}

ArchiveReader::ArchiveReader(const std::string &path) : ArchiveReader(BinaryReader(ReadFileBytes(path), path)) {}

ArchiveReader ArchiveReader::FromBytes(std::string bytes, std::string source) {
  return ArchiveReader(BinaryReader(std::move(bytes), std::move(source)));
}

FeatureSequence ArchiveReader::ReadRecord() {
  FeatureSequence seq;
  seq.utterance_id = reader_.ReadString();
  seq.num_frames = reader_.ReadU32();
  seq.dim = reader_.ReadU32();
  const std::size_t count = seq.num_frames * seq.dim;
  if (count * 4 > reader_.remaining())
    throw FormatError(reader_.source() + ": truncated record '" + seq.utterance_id + "' at byte offset " +
                      std::to_string(reader_.offset()) + ": expected " + std::to_string(count * 4) + " bytes, " +
                      std::to_string(reader_.remaining()) + " available");
  seq.frames.resize(count);
  for (float &v : seq.frames) v = reader_.ReadF32();
  return seq;
}

FeatureSequence ArchiveReader::ReadAt(std::uint64_t offset) {
  if (offset < data_start_)
    throw FormatError(reader_.source() + ": record offset " + std::to_string(offset) + " lies inside the header");
  reader_.Seek(offset);
  return ReadRecord();
}

std::vector<FeatureSequence> ArchiveReader::ReadAll() {
  reader_.Seek(data_start_);
  std::vector<FeatureSequence> out;
  while (!reader_.AtEnd()) out.push_back(ReadRecord());
  return out;
}

std::vector<FeatureSequence> ReadArchive(const std::string &path) { return ArchiveReader(path).ReadAll(); }

std::vector<FeatureSequence> LoadSplit(const std::string &archive_path, const CorpusManifest &manifest) {
  ArchiveReader reader(archive_path);
  std::vector<FeatureSequence> out;
  out.reserve(manifest.entries.size());
  for (const auto &e : manifest.entries) {
    FeatureSequence seq = reader.ReadAt(e.offset);
    if (seq.utterance_id != e.utterance_id)
      throw FormatError(archive_path + ": manifest expects '" + e.utterance_id + "' at byte offset " +
                        std::to_string(e.offset) + ", found '" + seq.utterance_id + "'");
    seq.speaker_id = e.speaker_id;
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace xvec
