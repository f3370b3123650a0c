// src/corpus/features.cc

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

#include "xvec/corpus/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"

namespace xvec {

void FeatureSequence::Validate() const {
  if (num_frames == 0) throw DataError("sequence " + utterance_id + " has no frames");
  if (dim == 0) throw DataError("sequence " + utterance_id + " has zero dimension");
  if (frames.size() != num_frames * dim)
    throw DataError("sequence " + utterance_id + " holds " + std::to_string(frames.size()) + " values for " +
                    std::to_string(num_frames) + "x" + std::to_string(dim));
  for (float v : frames)
    if (!std::isfinite(v)) throw DataError("sequence " + utterance_id + " contains a non-finite value");
}

diff::Tensor FeatureSequence::ToTensor(std::size_t max_frames) const {
  const std::size_t t = (max_frames > 0 && max_frames < num_frames) ? max_frames : num_frames;
  diff::Tensor out(diff::Shape{t, dim});
  std::copy_n(frames.begin(), t * dim, out.values().begin());
  return out;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kEnroll: return "enroll";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kValidation, Split::kEnroll, Split::kTest})
    if (SplitName(s) == name) return s;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::vector<std::string> CorpusManifest::Speakers() const {
  std::set<std::string> s;
  for (const auto &e : entries) s.insert(e.speaker_id);
  return {s.begin(), s.end()};
}

void CorpusManifest::Validate() const {
  std::set<std::string> seen;
  for (const auto &e : entries)
    if (!seen.insert(e.utterance_id).second)
      throw DataError(std::string(SplitName(split)) + " manifest lists utterance " + e.utterance_id + " twice");
}

void WriteManifest(const std::string &path, const CorpusManifest &manifest) {
  std::ostringstream out;
  for (const auto &e : manifest.entries) out << e.utterance_id << ' ' << e.speaker_id << ' ' << e.offset << '\n';
  WriteFileBytes(path, out.str());
}

CorpusManifest ReadManifest(const std::string &path, Split split) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  CorpusManifest m;
  m.split = split;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string extra;
    if (!(ls >> e.utterance_id >> e.speaker_id >> e.offset) || (ls >> extra))
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected '<utterance-id> <speaker-id> <byte-offset>'");
    m.entries.push_back(std::move(e));
  }
  m.Validate();
  return m;
}

void CheckDisjoint(std::span<const CorpusManifest> manifests) {
  std::unordered_map<std::string, Split> owner;
  for (const auto &m : manifests)
    for (const auto &e : m.entries) {
      auto [it, inserted] = owner.emplace(e.utterance_id, m.split);
      if (!inserted)
        throw DataError("utterance " + e.utterance_id + " appears in both " + std::string(SplitName(it->second)) +
                        " and " + std::string(SplitName(m.split)));
    }
}

std::map<std::string, int> SpeakerIndex(std::span<const FeatureSequence> sequences) {
  std::set<std::string> s;
  for (const auto &seq : sequences) s.insert(seq.speaker_id);
  std::map<std::string, int> index;
  int next = 0;
  for (const auto &id : s) index[id] = next++;
  return index;
}

}  // namespace xvec
