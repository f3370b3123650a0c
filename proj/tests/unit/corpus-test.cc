// tests/unit/corpus-test.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/corpus/archive.h"
#include "xvec/corpus/batching.h"
#include "xvec/corpus/noise-targets.h"
#include "xvec/corpus/synthetic.h"

using namespace xvec;

namespace {

std::string TempDir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("xvec-corpus-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

SyntheticCorpusOptions SmallOptions() {
  SyntheticCorpusOptions o;
  o.train_speakers = 6;
  o.train_utts_per_speaker = 4;
  o.validation_utts_per_speaker = 2;
  o.eval_speakers = 3;
  o.eval_utts_per_speaker = 4;
  o.min_frames = 40;
  o.max_frames = 80;
  o.seed = 9;
  return o;
}

FeatureSequence Ramp(std::size_t t, std::size_t d) {
  FeatureSequence s;
  s.utterance_id = "u";
  s.speaker_id = "s";
  s.num_frames = t;
  s.dim = d;
  for (std::size_t i = 0; i < t * d; ++i) s.frames.push_back(static_cast<float>(i));
  return s;
}

}  // namespace

TEST_CASE("synthetic corpus generation") {
  SyntheticCorpusOptions o;
  o.min_frames = 20;
  o.max_frames = 30;
  SyntheticCorpus a = GenerateSyntheticCorpus(o);
  CHECK(a.train.size() == 500);
  CHECK(a.validation.size() == 100);
  CHECK(a.enroll.size() == 40);
  CHECK(a.test.size() == 120);
  for (const auto &s : a.train) {
    s.Validate();
    CHECK(s.dim == 30);
    CHECK(s.num_frames >= 20);
    CHECK(s.num_frames <= 30);
  }
  SyntheticCorpus b = GenerateSyntheticCorpus(o);
  CHECK(EncodeArchive(a.train, nullptr) == EncodeArchive(b.train, nullptr));
  o.seed = 2;
  CHECK(EncodeArchive(GenerateSyntheticCorpus(o).train, nullptr) != EncodeArchive(a.train, nullptr));

  std::set<std::string> ids;
  for (auto *split : {&a.train, &a.validation, &a.enroll, &a.test})
    for (const auto &s : *split) CHECK(ids.insert(s.utterance_id).second);
}

TEST_CASE("synthetic speakers are separable from utterance means") {
  // Nearest-centroid probe: centroids from train means, scored on the
  // held-out validation utterances of the same speakers.
  SyntheticCorpusOptions o;
  o.min_frames = 100;
  o.max_frames = 150;
  SyntheticCorpus c = GenerateSyntheticCorpus(o);
  auto mean_of = [](const FeatureSequence &s) {
    std::vector<double> m(s.dim, 0.0);
    for (std::size_t t = 0; t < s.num_frames; ++t)
      for (std::size_t d = 0; d < s.dim; ++d) m[d] += s.at(t, d) / static_cast<double>(s.num_frames);
    return m;
  };
  std::map<std::string, std::vector<double>> centroid;
  std::map<std::string, int> count;
  for (const auto &s : c.train) {
    auto m = mean_of(s);
    auto &acc = centroid[s.speaker_id];
    acc.resize(m.size(), 0.0);
    for (std::size_t d = 0; d < m.size(); ++d) acc[d] += m[d];
    ++count[s.speaker_id];
  }
  for (auto &[spk, acc] : centroid)
    for (double &v : acc) v /= count[spk];
  int correct = 0;
  for (const auto &s : c.validation) {
    auto m = mean_of(s);
    std::string best;
    double best_d = 1e300;
    for (const auto &[spk, cen] : centroid) {
      double dist = 0.0;
      for (std::size_t d = 0; d < m.size(); ++d) dist += (m[d] - cen[d]) * (m[d] - cen[d]);
      if (dist < best_d) {
        best_d = dist;
        best = spk;
      }
    }
    correct += best == s.speaker_id;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(c.validation.size());
  CHECK(acc > 2.0 / static_cast<double>(o.train_speakers));
}

TEST_CASE("archive round trip and errors") {
  SyntheticCorpus c = GenerateSyntheticCorpus(SmallOptions());
  const std::string dir = TempDir("archive");
  auto offsets = WriteArchive(dir + "/a.farc", c.train);
  std::vector<FeatureSequence> back = ReadArchive(dir + "/a.farc");
  REQUIRE(back.size() == c.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].frames == c.train[i].frames);
    CHECK(back[i].utterance_id == c.train[i].utterance_id);
  }
  ArchiveReader reader(dir + "/a.farc");
  CHECK(reader.ReadAt(offsets[5]).utterance_id == c.train[5].utterance_id);

  SUBCASE("empty archive is valid") {
    WriteArchive(dir + "/e.farc", std::vector<FeatureSequence>{});
    CHECK(ReadArchive(dir + "/e.farc").empty());
  }
  SUBCASE("truncated archive names expected and available bytes") {
    std::string bytes = ReadFileBytes(dir + "/a.farc");
    bytes.resize(bytes.size() - 7);
    try {
      ArchiveReader::FromBytes(bytes, "trunc").ReadAll();
      FAIL("expected FormatError");
    } catch (const FormatError &e) {
      const std::string msg = e.what();
      CHECK(msg.find("expected") != std::string::npos);
      CHECK(msg.find("available") != std::string::npos);
    }
  }
  SUBCASE("bad magic and version") {
    CHECK_THROWS_AS(ArchiveReader::FromBytes("FARX\x01\x00\x00\x00", "m").ReadAll(), FormatError);
    CHECK_THROWS_AS(ArchiveReader::FromBytes(std::string("FARC\x09\x00\x00\x00", 8), "v").ReadAll(), FormatError);
  }
}

TEST_CASE("manifests and split loading") {
  SyntheticCorpus c = GenerateSyntheticCorpus(SmallOptions());
  const std::string dir = TempDir("manifest");
  WriteSyntheticCorpus(dir, c);
  CorpusManifest train = ReadManifest(dir + "/train.manifest", Split::kTrain);
  CorpusManifest test = ReadManifest(dir + "/test.manifest", Split::kTest);
  CHECK(train.entries.size() == 24);
  CHECK(train.Speakers().size() == 6);
  std::vector<CorpusManifest> all = {train, ReadManifest(dir + "/validation.manifest", Split::kValidation),
                                     ReadManifest(dir + "/enroll.manifest", Split::kEnroll), test};
  CheckDisjoint(all);
  std::vector<CorpusManifest> twice = {train, train};
  CHECK_THROWS_AS(CheckDisjoint(twice), DataError);

  auto loaded = LoadSplit(dir + "/train.farc", train);
  REQUIRE(loaded.size() == c.train.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i] == c.train[i]);
  CHECK_THROWS_AS(LoadSplit(dir + "/test.farc", train), FormatError);
  CHECK(std::filesystem::exists(dir + "/trials"));
}

TEST_CASE("sample_crop") {
  std::mt19937_64 rng(1);
  FeatureSequence s = Ramp(40, 3);
  CHECK(SampleCrop(s, 40, rng) == s);
  for (std::size_t len : {15u, 20u, 33u}) {
    FeatureSequence c = SampleCrop(s, len, rng);
    CHECK(c.num_frames == len);
    CHECK(c.frames.size() == len * 3);
    CHECK(c.speaker_id == "s");
    // contiguous: consecutive values differ by one
    for (std::size_t i = 1; i < c.frames.size(); ++i) CHECK(c.frames[i] == c.frames[i - 1] + 1.0f);
  }
  CHECK_THROWS_AS(SampleCrop(s, 41, rng), InputLengthError);
  CHECK_THROWS_AS(SampleCrop(s, 14, rng), InputLengthError);
}

TEST_CASE("sample_crop start offsets are uniform") {
  // Chi-square goodness of fit over the 6 possible starts; 5 dof critical
  // value at p = 0.01 is 15.086.
  std::mt19937_64 rng(2024);
  FeatureSequence s = Ramp(20, 1);
  const int draws = 60000;
  std::vector<int> counts(6, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(SampleCrop(s, 15, rng).frames[0])];
  double chi2 = 0.0;
  const double expected = draws / 6.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 15.086);
}

TEST_CASE("make_batches") {
  SyntheticCorpusOptions o = SmallOptions();
  o.min_frames = 20;
  o.max_frames = 60;
  SyntheticCorpus c = GenerateSyntheticCorpus(o);
  BatchingOptions b;
  b.batch_size = 5;
  b.min_crop = 25;
  b.max_crop = 40;
  BatchingOptions defaults;
  CHECK(defaults.min_crop == 200);
  CHECK(defaults.max_crop == 400);

  SetWarningsEnabled(false);
  std::mt19937_64 r1(3), r2(3);
  EpochPlan p1 = MakeBatches(c.train, b, r1);
  EpochPlan p2 = MakeBatches(c.train, b, r2);
  SetWarningsEnabled(true);
  std::size_t short_count = 0;
  for (const auto &s : c.train) short_count += s.num_frames < 25;
  CHECK(p1.skipped == short_count);
  REQUIRE(p1.batches.size() == p2.batches.size());
  std::vector<int> labels(c.train.size(), 0);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < p1.batches.size(); ++k) {
    CHECK(p1.batches[k].indices == p2.batches[k].indices);
    CHECK(p1.batches[k].starts == p2.batches[k].starts);
    CHECK(p1.batches[k].crop_len >= 25);
    CHECK(p1.batches[k].crop_len <= 40);
    Batch batch = AssembleBatch(p1.batches[k], c.train, labels);
    CHECK(batch.features.shape() == diff::Shape{5, p1.batches[k].crop_len, 30});
    seen.insert(p1.batches[k].indices.begin(), p1.batches[k].indices.end());
  }
  CHECK(seen.size() == c.train.size() - short_count);

  std::vector<FeatureSequence> mixed = {Ramp(20, 2), Ramp(21, 2)};
  CHECK_THROWS_AS(StackSequences(mixed), BatchError);
  b.batch_size = 1;
  std::mt19937_64 r3(1);
  CHECK_THROWS_AS(MakeBatches(c.train, b, r3), ConfigError);
}

TEST_CASE("noise targets") {
  NoiseTargetSource fixed(11, NoiseMode::kFixedPerUtterance, {8, 8});
  auto a = fixed.TargetFor("utt1", 0);
  CHECK(a == fixed.TargetFor("utt1", 0));
  CHECK(a != fixed.TargetFor("utt1", 1));
  CHECK(a != fixed.TargetFor("utt2", 0));
  NoiseTargetSource again(11, NoiseMode::kFixedPerUtterance, {8, 8});
  CHECK(again.TargetFor("utt1", 0) == a);
  CHECK_THROWS_AS(fixed.TargetFor("utt1", 2), ConfigError);

  NoiseTargetSource resampled(11, NoiseMode::kResampledPerBatch, {8, 8});
  CHECK(resampled.TargetFor("utt1", 0) != resampled.TargetFor("utt1", 0));

  // Standard-normal moments over 1e5 pooled coordinates.
  NoiseTargetSource wide(3, NoiseMode::kFixedPerUtterance, {100, 100});
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (int u = 0; u < 500; ++u)
    for (std::size_t l = 0; l < 2; ++l)
      for (double v : wide.TargetFor("utt" + std::to_string(u), l)) {
        sum += v;
        sq += v * v;
        ++n;
      }
  CHECK(n == 100000);
  const double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var > 0.98);
  CHECK(var < 1.02);

  std::vector<std::string> ids = {"a", "b"};
  diff::Tensor t = fixed.BatchTargets(ids, 1);
  CHECK(t.shape() == diff::Shape{2, 8});
  auto b = fixed.TargetFor("b", 1);
  CHECK(std::equal(b.begin(), b.end(), t.values().begin() + 8));
}
