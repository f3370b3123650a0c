// include/xvec/pipeline/commands.h

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

#ifndef XVEC_PIPELINE_COMMANDS_H_
#define XVEC_PIPELINE_COMMANDS_H_

#include <string>
#include <vector>

#include "xvec/backend/backend.h"
#include "xvec/evalkit/evalkit.h"
#include "xvec/pipeline/embeddings.h"
#include "xvec/pipeline/run-config.h"
#include "xvec/trainer/trainer.h"

namespace xvec {

/// Removes every registered output file (and the output directory, if this
/// guard created it and it ends up empty) unless Commit() was called.
class OutputGuard {
 public:
  explicit OutputGuard(std::string dir);
  ~OutputGuard();
  OutputGuard(const OutputGuard &) = delete;
  OutputGuard &operator=(const OutputGuard &) = delete;

  /// Registers `<dir>/<name>` and returns its path.
  std::string Output(const std::string &name);
  const std::string &dir() const { return dir_; }
  const std::vector<std::string> &outputs() const { return outputs_; }
  void Commit() { committed_ = true; }

 private:
  std::string dir_;
  std::vector<std::string> outputs_;
  std::vector<std::string> created_dirs_;
  bool committed_ = false;
};

/// Command-specific inputs. Empty fields fall back to the defaults described
/// for each command.
struct CommandInputs {
  std::string data_dir;                // corpus directory (default: config paths.data)
  std::string model_path;              // checkpoint
  std::vector<std::string> splits;     // extract (default: train, enroll, test)
  std::string embeddings_path;         // backend-train
  std::string backend_path;            // score
  std::string enroll_path, test_path;  // score
  std::string trials_path;             // score, evaluate (default: <data>/trials)
  std::vector<std::string> scores;     // evaluate, fuse: PATH or NAME=PATH
  std::string command_line;            // copied into the run record
};

struct CommandResult {
  std::vector<std::string> outputs;
  std::vector<MetricsReport> reports;  // evaluate and pipeline
  std::vector<TrainLog> logs;          // train and pipeline, one per system
  bool ok = true;                      // gradcheck verdict
};

/// Each command writes into config.out_dir, finishing with
/// `<out>/<command>.run.toml`: the config snapshot plus a [run] table holding
/// the command, seed and FNV-1a hashes of every input and output file. Any
/// exception removes the outputs already written. Missing inputs raise
/// ConfigError before any work is done.
///
/// gen-data: synthetic corpus archives, manifests and trials.
CommandResult RunGenData(const RunConfig &config, const CommandInputs &in);
/// train: model.xvck, train_steps.csv, train_epochs.csv for config.system.
CommandResult RunTrain(const RunConfig &config, const CommandInputs &in);
/// extract: <split>.xvem for each requested split.
CommandResult RunExtract(const RunConfig &config, const CommandInputs &in);
/// backend-train: backend.xvbk fitted on the speaker-labelled embeddings.
CommandResult RunBackendTrain(const RunConfig &config, const CommandInputs &in);
/// score: scores.txt with one PLDA score per trial.
CommandResult RunScore(const RunConfig &config, const CommandInputs &in);
/// evaluate: report.csv and det_<system>.csv; unnamed scores take the
/// config system name.
CommandResult RunEvaluate(const RunConfig &config, const CommandInputs &in);
/// fuse: scores.txt, the equal-weight average of exactly two score files.
CommandResult RunFuse(const RunConfig &config, const CommandInputs &in);
/// gradcheck: gradcheck.csv; ok is false when any entry reaches the
/// tolerance.
CommandResult RunGradCheck(const RunConfig &config, const CommandInputs &in);
/// pipeline: every stage for each configured system under
/// <out>/<system>/, the corpus under <out>/data unless paths.data is set,
/// GNCN-Fusion when both GNCN-F0-FC and GNCN-F1-FC are trained, and
/// <out>/report/.
CommandResult RunPipeline(const RunConfig &config, const CommandInputs &in);

/// Dispatches by subcommand name; ConfigError for an unknown one.
CommandResult RunCommand(const std::string &command, const RunConfig &config, const CommandInputs &in);
std::vector<std::string> CommandNames();

/// Scores every trial with the backend; DataError when a trial names an
/// utterance without an embedding.
ScoreSet ScoreTrials(const BackendModel &backend, const EmbeddingSet &enroll, const EmbeddingSet &test,
                     const TrialList &trials);

/// `<split>.farc` plus `<split>.manifest` from a corpus directory.
std::vector<FeatureSequence> LoadCorpusSplit(const std::string &dir, Split split);

}  // namespace xvec

#endif  // XVEC_PIPELINE_COMMANDS_H_
