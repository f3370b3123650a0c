// src/corpus/synthetic.cc

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

#include "xvec/corpus/synthetic.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/corpus/archive.h"

namespace xvec {

namespace {

struct Phones {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> stddevs;
};

std::uint64_t SubSeed(std::uint64_t seed, const std::string &tag) {
  BinaryWriter w;
  w.WriteU64(seed);
  return Fnv1a64(tag, Fnv1a64(w.buffer()));
}

Phones MakePhones(const SyntheticWorld &world, std::uint64_t seed) {
  std::mt19937_64 rng(SubSeed(seed, "phones"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.5, 1.0);
  Phones p;
  for (std::size_t k = 0; k < world.num_phones; ++k) {
    Eigen::VectorXd m(world.dim), s(world.dim);
    for (std::size_t d = 0; d < world.dim; ++d) m[d] = world.phone_spread * normal(rng);
    for (std::size_t d = 0; d < world.dim; ++d) s[d] = spread(rng);
    p.means.push_back(std::move(m));
    p.stddevs.push_back(std::move(s));
  }
  return p;
}

}  // namespace

std::vector<FeatureSequence> GenerateSpeakers(const SyntheticWorld &world, std::size_t num_speakers,
                                              std::size_t utts_per_speaker, std::size_t min_frames,
                                              std::size_t max_frames, std::uint64_t seed, const std::string &prefix) {
  if (num_speakers == 0 || utts_per_speaker == 0 || world.dim == 0 || world.num_phones == 0)
    throw ConfigError("synthetic corpus: counts and dimension must be positive");
  if (min_frames == 0 || min_frames > max_frames)
    throw ConfigError("synthetic corpus: invalid frame range [" + std::to_string(min_frames) + "," +
                      std::to_string(max_frames) + "]");
  if (world.min_segment == 0 || world.min_segment > world.max_segment)
    throw ConfigError("synthetic corpus: invalid phone segment range");

  const Phones phones = MakePhones(world, seed);
  const std::size_t dim = world.dim;
  std::vector<FeatureSequence> out;
  out.reserve(num_speakers * utts_per_speaker);
  for (std::size_t s = 0; s < num_speakers; ++s) {
    char spk_name[32];
    std::snprintf(spk_name, sizeof(spk_name), "spk%03zu", s);
    const std::string speaker = prefix + spk_name;
    std::mt19937_64 rng(SubSeed(seed, speaker));
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd transform = Eigen::MatrixXd::Identity(dim, dim);
    const double scale = world.speaker_transform / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) transform(i, j) += scale * normal(rng);
    Eigen::VectorXd offset(dim);
    for (std::size_t d = 0; d < dim; ++d) offset[d] = world.speaker_offset * normal(rng);

    std::uniform_int_distribution<std::size_t> length(min_frames, max_frames);
    std::uniform_int_distribution<std::size_t> segment(world.min_segment, world.max_segment);
    std::uniform_int_distribution<std::size_t> phone(0, world.num_phones - 1);
    for (std::size_t u = 0; u < utts_per_speaker; ++u) {
      FeatureSequence seq;
      char utt_name[48];
      std::snprintf(utt_name, sizeof(utt_name), "-utt%03zu", u);
      seq.utterance_id = speaker + utt_name;
      seq.speaker_id = speaker;
      seq.dim = dim;
      seq.num_frames = length(rng);
      seq.frames.resize(seq.num_frames * dim);
      Eigen::VectorXd channel(dim);
      for (std::size_t d = 0; d < dim; ++d) channel[d] = world.channel_offset * normal(rng);
      Eigen::VectorXd z(dim);
      std::size_t t = 0;
      while (t < seq.num_frames) {
        const std::size_t p = phone(rng);
        const std::size_t len = std::min(segment(rng), seq.num_frames - t);
        for (std::size_t i = 0; i < len; ++i, ++t) {
          for (std::size_t d = 0; d < dim; ++d) z[d] = phones.means[p][d] + phones.stddevs[p][d] * normal(rng);
          Eigen::VectorXd x = transform * z + offset + channel;
          for (std::size_t d = 0; d < dim; ++d)
            seq.frames[t * dim + d] = static_cast<float>(x[d] + world.frame_noise * normal(rng));
        }
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusOptions &o) {
  if (o.enroll_utts_per_speaker == 0 || o.enroll_utts_per_speaker >= o.eval_utts_per_speaker)
    throw ConfigError("synthetic corpus: enroll_utts_per_speaker must lie in [1, eval_utts_per_speaker)");
  SyntheticCorpus c;
  auto train_all = GenerateSpeakers(o.world, o.train_speakers,
                                    o.train_utts_per_speaker + o.validation_utts_per_speaker, o.min_frames,
                                    o.max_frames, o.seed, "train-");
  const std::size_t per = o.train_utts_per_speaker + o.validation_utts_per_speaker;
  for (std::size_t i = 0; i < train_all.size(); ++i)
    (i % per < o.train_utts_per_speaker ? c.train : c.validation).push_back(std::move(train_all[i]));

  auto eval_all = GenerateSpeakers(o.world, o.eval_speakers, o.eval_utts_per_speaker, o.min_frames, o.max_frames,
                                   o.seed, "eval-");
  for (std::size_t i = 0; i < eval_all.size(); ++i)
    (i % o.eval_utts_per_speaker < o.enroll_utts_per_speaker ? c.enroll : c.test).push_back(std::move(eval_all[i]));
  return c;
}

void WriteSyntheticCorpus(const std::string &dir, const SyntheticCorpus &corpus) {
  std::filesystem::create_directories(dir);
  auto write_split = [&](Split split, const std::vector<FeatureSequence> &seqs) {
    const std::string name(SplitName(split));
    auto offsets = WriteArchive(dir + "/" + name + ".farc", seqs);
    CorpusManifest m;
    m.split = split;
    for (std::size_t i = 0; i < seqs.size(); ++i)
      m.entries.push_back({seqs[i].utterance_id, seqs[i].speaker_id, offsets[i]});
    WriteManifest(dir + "/" + name + ".manifest", m);
  };
  write_split(Split::kTrain, corpus.train);
  write_split(Split::kValidation, corpus.validation);
  write_split(Split::kEnroll, corpus.enroll);
  write_split(Split::kTest, corpus.test);

  std::ostringstream trials;
  for (const auto &e : corpus.enroll)
    for (const auto &t : corpus.test)
      trials << e.utterance_id << ' ' << t.utterance_id << ' '
             << (e.speaker_id == t.speaker_id ? "target" : "nontarget") << '\n';
  WriteFileBytes(dir + "/trials", trials.str());
}

}  // namespace xvec
