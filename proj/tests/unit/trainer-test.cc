// tests/unit/trainer-test.cc

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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/corpus/synthetic.h"
#include "xvec/trainer/trainer.h"

using namespace xvec;

namespace {

ModelSpec TinySpec() {
  ModelSpec s;
  s.feature_dim = 30;
  s.frame_layers = {{32, 5, 1}, {32, 3, 2}, {32, 3, 3}, {32, 1, 1}, {96, 1, 1}};
  s.embed_dims = {64, 64};
  return s;
}

const TrainData &ToyData() {
  static const TrainData data = [] {
    SyntheticCorpusOptions o;
    o.train_speakers = 5;
    o.train_utts_per_speaker = 20;
    o.validation_utts_per_speaker = 2;
    o.eval_speakers = 2;
    o.eval_utts_per_speaker = 3;
    o.enroll_utts_per_speaker = 1;
    o.min_frames = 60;
    o.max_frames = 100;
    o.seed = 9;
    SyntheticCorpus c = GenerateSyntheticCorpus(o);
    return TrainData::FromSplits(std::move(c.train), std::move(c.validation));
  }();
  return data;
}

TrainConfig ToyConfig(const std::string &system) {
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 16;
  c.min_crop = 40;
  c.max_crop = 60;
  c.validation_max_frames = 100;
  c.seed = 3;
  c.system = SystemPreset(system);
  return c;
}

std::string ParameterBytes(XvectorModel &model, bool primary_only) {
  std::string out;
  for (diff::Tensor *t : primary_only ? model.PrimaryParameters() : model.Parameters())
    out.append(reinterpret_cast<const char *>(t->data()), t->size() * sizeof(double));
  return out;
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("xvec-" + std::to_string(::getpid()) + "-" + name)).string();
}

}  // namespace

TEST_CASE("schedule_lr") {
  TrainConfig c;
  CHECK(ScheduleLr(0, 100, c) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(ScheduleLr(100, 100, c) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(ScheduleLr(50, 100, c) == doctest::Approx(std::sqrt(1e-3 * 1e-4)).epsilon(1e-12));
  CHECK(ScheduleLr(50, 100, c) == doctest::Approx(3.162e-4).epsilon(1e-4));
  for (std::size_t s = 1; s <= 100; ++s) CHECK(ScheduleLr(s, 100, c) < ScheduleLr(s - 1, 100, c));
  CHECK(ScheduleLr(0, 0, c) == doctest::Approx(1e-3));
}

TEST_CASE("schedule_lambda") {
  TrainConfig c;
  const std::vector<double> improving = {3.0, 2.0, 1.5, 1.0};
  for (std::size_t n = 1; n <= improving.size(); ++n)
    CHECK(ScheduleLambda(std::span(improving).first(n), 0.1, c) == 0.1);
  const std::vector<double> stalled = {3.0, 2.0, 2.5};
  CHECK(ScheduleLambda(stalled, 0.1, c) == doctest::Approx(0.05).epsilon(1e-15));
  double lambda = 0.1;
  std::vector<double> history = {1.0};
  for (int i = 0; i < 20; ++i) {
    history.push_back(2.0);
    const double next = ScheduleLambda(history, lambda, c);
    CHECK(next <= lambda);
    CHECK(next >= c.lambda_floor);
    lambda = next;
  }
  CHECK(lambda == doctest::Approx(1e-3));
  CHECK(ScheduleLambda(history, 0.0, c) == 0.0);
  TrainConfig p2 = c;
  p2.patience = 2;
  CHECK(ScheduleLambda(stalled, 0.1, p2) == 0.1);
  const std::vector<double> stalled_twice = {3.0, 2.0, 2.5, 2.1};
  CHECK(ScheduleLambda(stalled_twice, 0.1, p2) == doctest::Approx(0.05));
}

TEST_CASE("train config validation and round trip") {
  TrainConfig c = ToyConfig("GNCN-F1-FC");
  c.Validate();
  BinaryWriter w;
  WriteTrainConfig(w, c);
  BinaryReader r(w.buffer(), "mem");
  TrainConfig back = ReadTrainConfig(r);
  CHECK(back.epochs == c.epochs);
  CHECK(back.seed == c.seed);
  CHECK(back.system == c.system);
  TrainConfig bad = c;
  bad.lr_final = 2e-3;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
  bad = c;
  bad.lambda_decay_factor = 0.0;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
  bad = c;
  bad.patience = 0;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
}

TEST_CASE("validate: untrained CE near ln S, purity") {
  Trainer t(TinySpec(), ToyConfig("x-vector"), &ToyData());
  const std::string before = ParameterBytes(t.model(), false);
  const std::uint64_t hash = t.model().StateHash();
  ValidationResult v = ValidateModel(t.model(), ToyData().validation, ToyData().validation_labels, 100);
  CHECK(std::abs(v.ce - std::log(5.0)) < 0.1 * std::log(5.0));
  CHECK(v.accuracy >= 0.0);
  CHECK(v.accuracy <= 1.0);
  CHECK(ParameterBytes(t.model(), false) == before);
  CHECK(t.model().StateHash() == hash);
  CHECK_THROWS(ValidateModel(t.model(), {}, {}, 100));
}

TEST_CASE("toy corpus training: learnability, loss bookkeeping, determinism") {
  for (const char *system : {"x-vector", "GNCN-F1-FC", "GTM"}) {
    CAPTURE(system);
    Trainer a(TinySpec(), ToyConfig(system), &ToyData());
    a.Run();
    const TrainLog &log = a.log();
    REQUIRE(log.epochs.size() == 5);
    CHECK(log.steps.size() == 5 * a.steps_per_epoch());
    CHECK(log.epochs.back().train_ce < std::log(5.0));
    double prev_lambda = 1e300;
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
      const StepRecord &s = log.steps[i];
      CHECK(s.step == i);
      CHECK(std::abs(s.total - (s.ce + s.lambda * s.aux)) <= 1e-12 * std::max(1.0, std::abs(s.total)));
      CHECK(std::isfinite(s.total));
      CHECK(s.lambda <= prev_lambda);
      prev_lambda = s.lambda;
    }
    if (std::string(system) == "x-vector") CHECK(log.steps.back().lambda == 0.0);
    if (std::string(system) == "GNCN-F1-FC")
      for (const auto &e : log.epochs) CHECK(e.lambda >= 1e-3);
    Trainer b(TinySpec(), ToyConfig(system), &ToyData());
    b.Run();
    CHECK(b.log() == log);
    CHECK(b.log().StepCsv() == log.StepCsv());
    CHECK(b.EncodeCheckpoint() == a.EncodeCheckpoint());
  }
}

TEST_CASE("step csv layout") {
  Trainer t(TinySpec(), ToyConfig("GNCN-F1-FC"), &ToyData());
  t.RunEpoch();
  const std::string csv = t.log().StepCsv();
  CHECK(csv.rfind("step,epoch,ce,aux,lambda,lr,total\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == t.steps_per_epoch() + 1);
}

TEST_CASE("lambda = 0 reproduces the baseline parameter trajectory") {
  TrainConfig base = ToyConfig("x-vector");
  TrainConfig gncn = ToyConfig("GNCN-F1-FC");
  gncn.lambda_initial = 0.0;
  base.epochs = gncn.epochs = 3;
  Trainer a(TinySpec(), base, &ToyData());
  Trainer b(TinySpec(), gncn, &ToyData());
  for (int e = 0; e < 3; ++e) {
    a.RunEpoch();
    b.RunEpoch();
    CHECK(ParameterBytes(a.model(), true) == ParameterBytes(b.model(), true));
  }
  for (std::size_t i = 0; i < a.log().steps.size(); ++i) CHECK(a.log().steps[i].ce == b.log().steps[i].ce);
}

TEST_CASE("checkpoint round trip, resume and corruption") {
  TrainConfig c = ToyConfig("GNCN-F1-FC");
  c.epochs = 4;
  Trainer full(TinySpec(), c, &ToyData());
  full.Run();

  const std::string path = TempPath("ckpt.xvck");
  Trainer first(TinySpec(), c, &ToyData());
  first.RunEpoch();
  first.RunEpoch();
  first.SaveCheckpoint(path);
  Trainer resumed = Trainer::LoadCheckpoint(path, &ToyData());
  CHECK(resumed.epoch() == 2);
  CHECK(resumed.EncodeCheckpoint() == first.EncodeCheckpoint());

  diff::Tensor frames = ToyData().validation[0].ToTensor();
  XvectorModel loaded = LoadModelFromCheckpoint(path);
  diff::Tensor e1 = first.model().ExtractEmbedding(frames), e2 = loaded.ExtractEmbedding(frames);
  CHECK(std::equal(e1.data(), e1.data() + e1.size(), e2.data()));

  resumed.Run();
  CHECK(resumed.log() == full.log());
  CHECK(ParameterBytes(resumed.model(), false) == ParameterBytes(full.model(), false));
  CHECK(resumed.EncodeCheckpoint() == full.EncodeCheckpoint());

  std::string bytes = ReadFileBytes(path);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  CHECK_THROWS_AS(Trainer::DecodeCheckpoint(flipped, "flipped", &ToyData()), FormatError);
  CHECK_THROWS_AS(Trainer::DecodeCheckpoint(bytes.substr(0, bytes.size() - 3), "short", &ToyData()), FormatError);
  std::string magic = bytes;
  magic[0] = 'Z';
  CHECK_THROWS_AS(Trainer::DecodeCheckpoint(magic, "magic", &ToyData()), FormatError);
  std::remove(path.c_str());
}
