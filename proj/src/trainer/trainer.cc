// src/trainer/trainer.cc

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

#include "xvec/trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "xvec/diff/ops.h"
#include "xvec/model/objective.h"

namespace xvec {

using diff::Graph;
using diff::Mode;
using diff::Tensor;
using diff::Var;

namespace {

constexpr std::string_view kCheckpointMagic = "XVCK";

std::string RngState(const std::mt19937_64 &rng) {
  std::ostringstream s;
  s << rng;
  return s.str();
}

void LoadRngState(std::mt19937_64 &rng, const std::string &state) {
  std::istringstream s(state);
  s >> rng;
  if (!s) throw FormatError("checkpoint: corrupt generator state");
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Verifies magic, version and trailing checksum; returns a reader positioned
// after the version field.
BinaryReader OpenCheckpoint(const std::string &bytes, const std::string &source) {
  if (bytes.size() < kCheckpointMagic.size() + 4 + 8)
    throw FormatError(source + ": checkpoint too short (" + std::to_string(bytes.size()) + " bytes)");
  BinaryReader tail(bytes.substr(bytes.size() - 8), source);
  const std::uint64_t stored = tail.ReadU64();
  const std::string body = bytes.substr(0, bytes.size() - 8);
  if (Fnv1a64(body) != stored) throw FormatError(source + ": checkpoint checksum mismatch (file corrupted)");
  BinaryReader in(body, source);
  in.ExpectMagic(kCheckpointMagic);
  const std::uint32_t version = in.ReadU32();
  if (version != kCheckpointVersion)
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version));
  return in;
}

}  // namespace

void TrainConfig::Validate() const {
  auto fail = [](const std::string &m) { throw ConfigError("train config: " + m); };
  if (epochs == 0) fail("epochs must be positive");
  if (batch_size < 2) fail("batch_size must be at least 2");
  if (min_crop < kMinCropFrames || min_crop > max_crop) fail("invalid crop range");
  if (!(lr_initial > 0.0) || !(lr_final > 0.0) || lr_final > lr_initial) fail("need 0 < lr_final <= lr_initial");
  if (weight_decay < 0.0) fail("weight_decay must be non-negative");
  if (lambda_initial < 0.0) fail("lambda_initial must be non-negative");
  if (!(lambda_decay_factor > 0.0 && lambda_decay_factor <= 1.0)) fail("lambda_decay_factor must lie in (0,1]");
  if (lambda_floor < 0.0) fail("lambda_floor must be non-negative");
  if (patience < 1) fail("patience must be at least 1");
  if (validation_max_frames < kMinCropFrames) fail("validation_max_frames is below the minimum input length");
  if (system.objective == Objective::kGncn && !system.aux) fail("GNCN system needs an auxiliary branch");
}

void WriteTrainConfig(BinaryWriter &out, const TrainConfig &c) {
  out.WriteU64(c.epochs);
  out.WriteU64(c.batch_size);
  out.WriteU64(c.min_crop);
  out.WriteU64(c.max_crop);
  out.WriteF64(c.lr_initial);
  out.WriteF64(c.lr_final);
  out.WriteF64(c.weight_decay);
  out.WriteF64(c.lambda_initial);
  out.WriteF64(c.lambda_decay_factor);
  out.WriteF64(c.lambda_floor);
  out.WriteU64(c.patience);
  out.WriteU64(c.validation_max_frames);
  out.WriteU64(c.seed);
  WriteSystemConfig(out, c.system);
}

TrainConfig ReadTrainConfig(BinaryReader &in) {
  TrainConfig c;
  c.epochs = in.ReadU64();
  c.batch_size = in.ReadU64();
  c.min_crop = in.ReadU64();
  c.max_crop = in.ReadU64();
  c.lr_initial = in.ReadF64();
  c.lr_final = in.ReadF64();
  c.weight_decay = in.ReadF64();
  c.lambda_initial = in.ReadF64();
  c.lambda_decay_factor = in.ReadF64();
  c.lambda_floor = in.ReadF64();
  c.patience = in.ReadU64();
  c.validation_max_frames = in.ReadU64();
  c.seed = in.ReadU64();
  c.system = ReadSystemConfig(in);
  return c;
}

double ScheduleLr(std::size_t step, std::size_t total_steps, const TrainConfig &c) {
  if (total_steps == 0) return c.lr_initial;
  const double frac = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return c.lr_initial * std::pow(c.lr_final / c.lr_initial, frac);
}

double ScheduleLambda(std::span<const double> h, double current, const TrainConfig &c) {
  if (h.size() <= c.patience) return current;
  const double best_before = *std::min_element(h.begin(), h.end() - static_cast<std::ptrdiff_t>(c.patience));
  for (std::size_t i = h.size() - c.patience; i < h.size(); ++i)
    if (h[i] < best_before) return current;
  return std::min(current, std::max(current * c.lambda_decay_factor, c.lambda_floor));
}

std::string TrainLog::StepCsv() const {
  std::string out = "step,epoch,ce,aux,lambda,lr,total\n";
  for (const auto &r : steps)
    out += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + FormatDouble(r.ce) + "," +
           FormatDouble(r.aux) + "," + FormatDouble(r.lambda) + "," + FormatDouble(r.lr) + "," +
           FormatDouble(r.total) + "\n";
  return out;
}

std::string TrainLog::EpochCsv() const {
  std::string out = "epoch,train_ce,train_aux,validation_ce,validation_accuracy,lambda\n";
  for (const auto &r : epochs)
    out += std::to_string(r.epoch) + "," + FormatDouble(r.train_ce) + "," + FormatDouble(r.train_aux) + "," +
           FormatDouble(r.validation_ce) + "," + FormatDouble(r.validation_accuracy) + "," +
           FormatDouble(r.lambda) + "\n";
  return out;
}

bool TrainLog::operator==(const TrainLog &o) const { return StepCsv() == o.StepCsv() && EpochCsv() == o.EpochCsv(); }

TrainData TrainData::FromSplits(std::vector<FeatureSequence> train, std::vector<FeatureSequence> validation) {
  if (train.empty()) throw DataError("training split is empty");
  TrainData d;
  auto index = SpeakerIndex(train);
  for (const auto &[spk, idx] : index) d.speakers.push_back(spk);
  for (const auto &s : train) d.train_labels.push_back(index.at(s.speaker_id));
  for (const auto &s : validation) {
    auto it = index.find(s.speaker_id);
    if (it == index.end()) throw DataError("validation speaker " + s.speaker_id + " is not in the training split");
    d.validation_labels.push_back(it->second);
  }
  d.train = std::move(train);
  d.validation = std::move(validation);
  return d;
}

ValidationResult ValidateModel(XvectorModel &model, std::span<const FeatureSequence> sequences,
                               std::span<const int> labels, std::size_t max_frames) {
  if (sequences.empty()) throw DataError("validation split is empty");
  if (labels.size() != sequences.size()) throw LabelError("validation: label count does not match sequences");
  double ce = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    Graph g;
    ForwardRecord rec = model.Forward(g, sequences[i].ToTensor(max_frames), Mode::kEval, false);
    const int label = labels[i];
    ce += diff::SoftmaxCrossEntropy(rec.logits, std::span<const int>(&label, 1)).value()[0];
    const auto &logits = rec.logits.value().values();
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    correct += best == label;
  }
  const double n = static_cast<double>(sequences.size());
  return {ce / n, static_cast<double>(correct) / n};
}

Trainer::Trainer(const ModelSpec &spec, const TrainConfig &config, const TrainData *data)
    : Trainer(
          [&] {
            if (data == nullptr) throw DataError("trainer needs training data");
            ModelSpec s = SpecForSystem(spec, config.system);
            s.num_speakers = data->speakers.size();
            return XvectorModel::Build(s, config.system.aux, config.seed);
          }(),
          config, data) {
  weight_ = config_.system.objective == Objective::kGncn  ? config_.lambda_initial
            : config_.system.objective == Objective::kGtm ? config_.system.gtm_alpha
                                                          : 0.0;
}

Trainer::Trainer(XvectorModel model, const TrainConfig &config, const TrainData *data)
    : config_(config),
      data_(data),
      model_(std::move(model)),
      adam_(diff::AdamOptions{config.lr_initial, 0.9, 0.999, 1e-8, config.weight_decay}),
      batch_rng_(config.seed ^ 0x5851F42D4C957F2DULL),
      noise_(config.seed,
             config.system.aux ? config.system.aux->noise_mode : NoiseMode::kFixedPerUtterance,
             config.system.aux ? std::vector<std::size_t>{model_.NoiseDim(0), model_.NoiseDim(1)}
                               : std::vector<std::size_t>{}) {
  config_.Validate();
  Init();
}

void Trainer::Init() {
  if (data_ == nullptr) throw DataError("trainer needs training data");
  if (data_->train_labels.size() != data_->train.size()) throw LabelError("training labels do not match sequences");
  if (data_->speakers.size() != model_.spec().num_speakers)
    throw DataError("training data has " + std::to_string(data_->speakers.size()) + " speakers, model expects " +
                    std::to_string(model_.spec().num_speakers));
  std::size_t eligible = 0;
  for (const auto &s : data_->train) eligible += s.num_frames >= config_.min_crop;
  if (eligible < 2) throw DataError("fewer than 2 training utterances reach the minimum crop length");
  steps_per_epoch_ = (eligible + config_.batch_size - 1) / config_.batch_size;
}

StepRecord Trainer::TrainStep(const Batch &batch, double lr) {
  StepRecord rec;
  rec.step = step_;
  rec.epoch = epoch_;
  rec.lr = lr;
  rec.lambda = weight_;
  try {
    Graph g;
    ForwardRecord fwd = model_.Forward(g, batch.features, Mode::kTrain, true);
    std::vector<Tensor> targets;
    if (config_.system.objective == Objective::kGncn)
      for (std::size_t l = 0; l < kNumEmbeddingLayers; ++l)
        targets.push_back(noise_.BatchTargets(batch.utterance_ids, l));
    LossTerms terms = ComputeLoss(model_, g, fwd, batch.labels, config_.system, weight_, targets);
    rec.ce = terms.ce.value()[0];
    rec.aux = terms.aux_value();
    rec.total = terms.total.value()[0];
    if (!std::isfinite(rec.total)) throw NumericError("non-finite total loss");
    model_.ZeroGrad();
    g.Backward(terms.total);
    adam_.set_learning_rate(lr);
    auto params = model_.Parameters();
    adam_.Step(params);
    for (diff::Tensor *p : params) p->CheckFinite("parameter after update");
  } catch (const DivergenceError &) {
    throw;
  } catch (const NumericError &e) {
    throw DivergenceError(step_, e.what());
  }
  return rec;
}

void Trainer::RunEpoch() {
  if (done()) throw ConfigError("training already finished");
  BatchingOptions bo{config_.batch_size, config_.min_crop, config_.max_crop};
  EpochPlan plan = MakeBatches(data_->train, bo, batch_rng_);
  const std::size_t total_steps = config_.epochs * steps_per_epoch_;
  EpochRecord er;
  er.epoch = epoch_;
  er.lambda = weight_;
  for (const BatchPlan &bp : plan.batches) {
    Batch batch = AssembleBatch(bp, data_->train, data_->train_labels);
    StepRecord rec = TrainStep(batch, ScheduleLr(step_, total_steps > 0 ? total_steps - 1 : 0, config_));
    er.train_ce += rec.ce;
    er.train_aux += rec.aux;
    log_.steps.push_back(rec);
    ++step_;
  }
  er.train_ce /= static_cast<double>(plan.batches.size());
  er.train_aux /= static_cast<double>(plan.batches.size());
  if (!data_->validation.empty()) {
    ValidationResult v =
        ValidateModel(model_, data_->validation, data_->validation_labels, config_.validation_max_frames);
    er.validation_ce = v.ce;
    er.validation_accuracy = v.accuracy;
    validation_ce_.push_back(v.ce);
    if (config_.system.objective == Objective::kGncn) weight_ = ScheduleLambda(validation_ce_, weight_, config_);
  }
  log_.epochs.push_back(er);
  ++epoch_;
}

void Trainer::Run(const std::string &checkpoint_path) {
  while (!done()) {
    RunEpoch();
    if (!checkpoint_path.empty()) SaveCheckpoint(checkpoint_path);
  }
}

std::string Trainer::EncodeCheckpoint() const {
  BinaryWriter w;
  w.WriteBytes(kCheckpointMagic);
  w.WriteU32(kCheckpointVersion);
  WriteTrainConfig(w, config_);
  model_.Write(w);
  adam_.Write(w);
  w.WriteString(RngState(batch_rng_));
  w.WriteString(noise_.SaveState());
  w.WriteF64(weight_);
  w.WriteU64(epoch_);
  w.WriteU64(step_);
  w.WriteF64Vector(validation_ce_);
  w.WriteU64(log_.steps.size());
  for (const auto &r : log_.steps) {
    w.WriteU64(r.step);
    w.WriteU64(r.epoch);
    for (double v : {r.ce, r.aux, r.lambda, r.lr, r.total}) w.WriteF64(v);
  }
  w.WriteU64(log_.epochs.size());
  for (const auto &r : log_.epochs) {
    w.WriteU64(r.epoch);
    for (double v : {r.train_ce, r.train_aux, r.validation_ce, r.validation_accuracy, r.lambda}) w.WriteF64(v);
  }
  BinaryWriter trailer;
  trailer.WriteU64(Fnv1a64(w.buffer()));
  return w.buffer() + trailer.buffer();
}

void Trainer::SaveCheckpoint(const std::string &path) const { WriteFileBytes(path, EncodeCheckpoint()); }

Trainer Trainer::DecodeCheckpoint(const std::string &bytes, const std::string &source, const TrainData *data) {
  BinaryReader in = OpenCheckpoint(bytes, source);
  TrainConfig config = ReadTrainConfig(in);
  XvectorModel model = XvectorModel::Read(in);
  Trainer t(std::move(model), config, data);
  t.adam_ = diff::Adam::Read(in);
  LoadRngState(t.batch_rng_, in.ReadString());
  t.noise_.LoadState(in.ReadString());
  t.weight_ = in.ReadF64();
  t.epoch_ = in.ReadU64();
  t.step_ = in.ReadU64();
  t.validation_ce_ = in.ReadF64Vector();
  const std::uint64_t num_steps = in.ReadU64();
  for (std::uint64_t i = 0; i < num_steps; ++i) {
    StepRecord r;
    r.step = in.ReadU64();
    r.epoch = in.ReadU64();
    r.ce = in.ReadF64();
    r.aux = in.ReadF64();
    r.lambda = in.ReadF64();
    r.lr = in.ReadF64();
    r.total = in.ReadF64();
    t.log_.steps.push_back(r);
  }
  const std::uint64_t num_epochs = in.ReadU64();
  for (std::uint64_t i = 0; i < num_epochs; ++i) {
    EpochRecord r;
    r.epoch = in.ReadU64();
    r.train_ce = in.ReadF64();
    r.train_aux = in.ReadF64();
    r.validation_ce = in.ReadF64();
    r.validation_accuracy = in.ReadF64();
    r.lambda = in.ReadF64();
    t.log_.epochs.push_back(r);
  }
  if (!in.AtEnd()) throw FormatError(source + ": trailing bytes in checkpoint");
  return t;
}

Trainer Trainer::LoadCheckpoint(const std::string &path, const TrainData *data) {
  return DecodeCheckpoint(ReadFileBytes(path), path, data);
}

XvectorModel LoadModelFromCheckpoint(const std::string &path) {
  BinaryReader in = OpenCheckpoint(ReadFileBytes(path), path);
  ReadTrainConfig(in);
  return XvectorModel::Read(in);
}

}  // namespace xvec
