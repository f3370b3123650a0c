// include/xvec/trainer/trainer.h

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

#ifndef XVEC_TRAINER_TRAINER_H_
#define XVEC_TRAINER_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xvec/base/error.h"
#include "xvec/corpus/batching.h"
#include "xvec/corpus/features.h"
#include "xvec/corpus/noise-targets.h"
#include "xvec/diff/adam.h"
#include "xvec/model/model-spec.h"
#include "xvec/model/xvector-model.h"

namespace xvec {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::size_t min_crop = 200;
  std::size_t max_crop = 400;
  double lr_initial = 1e-3;
  double lr_final = 1e-4;
  double weight_decay = 1e-4;
  double lambda_initial = 0.1;
  double lambda_decay_factor = 0.5;
  double lambda_floor = 1e-3;
  std::size_t patience = 1;
  std::size_t validation_max_frames = 400;
  std::uint64_t seed = 1;
  SystemConfig system;

  /// Throws ConfigError on out-of-range values.
  void Validate() const;
};

void WriteTrainConfig(BinaryWriter &out, const TrainConfig &config);
TrainConfig ReadTrainConfig(BinaryReader &in);

/// Geometric interpolation from lr_initial (step 0) to lr_final
/// (step == total_steps).
double ScheduleLr(std::size_t step, std::size_t total_steps, const TrainConfig &config);

/// Returns the weight for the next epoch given validation CE so far. When the
/// last `patience` epochs all failed to improve on the best earlier value,
/// lambda <- max(lambda * factor, floor); lambda never increases.
double ScheduleLambda(std::span<const double> validation_ce, double current, const TrainConfig &config);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double ce = 0.0;
  double aux = 0.0;
  double lambda = 0.0;  // weight on aux (lambda for GNCN, alpha for GTM, 0 otherwise)
  double lr = 0.0;
  double total = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_ce = 0.0;  // mean over the epoch's steps
  double train_aux = 0.0;
  double validation_ce = 0.0;
  double validation_accuracy = 0.0;
  double lambda = 0.0;  // weight used during the epoch
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  /// `step,epoch,ce,aux,lambda,lr,total` with round-trip precision.
  std::string StepCsv() const;
  std::string EpochCsv() const;
  bool operator==(const TrainLog &other) const;
};

/// Training split plus validation split, labelled by training-speaker index.
struct TrainData {
  std::vector<FeatureSequence> train;
  std::vector<int> train_labels;
  std::vector<FeatureSequence> validation;
  std::vector<int> validation_labels;
  std::vector<std::string> speakers;  // label -> speaker id

  /// Labels speakers in sorted order; DataError if a validation speaker is
  /// absent from the training split.
  static TrainData FromSplits(std::vector<FeatureSequence> train, std::vector<FeatureSequence> validation);
};

struct ValidationResult {
  double ce = 0.0;
  double accuracy = 0.0;
};

/// Eval-mode pass over whole utterances, each capped at `max_frames`. Does
/// not modify the model.
ValidationResult ValidateModel(XvectorModel &model, std::span<const FeatureSequence> sequences,
                               std::span<const int> labels, std::size_t max_frames);

/// Raised when a training step produces a non-finite value.
class DivergenceError : public NumericError {
 public:
  DivergenceError(std::size_t step, const std::string &what)
      : NumericError("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Owns the full mutable training state so that a run can be checkpointed
/// after any epoch and resumed bit-exactly.
class Trainer {
 public:
  /// Builds a fresh model for `config.system` from `spec` (num_speakers is
  /// taken from the data).
  Trainer(const ModelSpec &spec, const TrainConfig &config, const TrainData *data);

  /// Runs one epoch: batches, steps, validation, lambda update.
  void RunEpoch();
  /// Runs the remaining epochs, saving a checkpoint after each one when
  /// `checkpoint_path` is non-empty.
  void Run(const std::string &checkpoint_path = "");
  bool done() const { return epoch_ >= config_.epochs; }

  std::size_t epoch() const { return epoch_; }
  std::size_t step() const { return step_; }
  double weight() const { return weight_; }
  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  const TrainConfig &config() const { return config_; }
  const TrainLog &log() const { return log_; }
  XvectorModel &model() { return model_; }
  const XvectorModel &model() const { return model_; }

  /// "XVCK" container with the model, optimizer, generators and log,
  /// followed by an FNV-1a checksum of everything before it.
  std::string EncodeCheckpoint() const;
  void SaveCheckpoint(const std::string &path) const;
  static Trainer LoadCheckpoint(const std::string &path, const TrainData *data);
  static Trainer DecodeCheckpoint(const std::string &bytes, const std::string &source, const TrainData *data);

 private:
  Trainer(XvectorModel model, const TrainConfig &config, const TrainData *data);
  void Init();
  StepRecord TrainStep(const Batch &batch, double lr);

  TrainConfig config_;
  const TrainData *data_;
  XvectorModel model_;
  diff::Adam adam_;
  std::mt19937_64 batch_rng_;
  NoiseTargetSource noise_;
  double weight_ = 0.0;
  std::size_t epoch_ = 0;
  std::size_t step_ = 0;
  std::size_t steps_per_epoch_ = 0;
  std::vector<double> validation_ce_;
  TrainLog log_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Loads only the model from a checkpoint written by Trainer.
XvectorModel LoadModelFromCheckpoint(const std::string &path);

}  // namespace xvec

#endif  // XVEC_TRAINER_TRAINER_H_
