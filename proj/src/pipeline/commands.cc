// src/pipeline/commands.cc

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

#include "xvec/pipeline/commands.h"

#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/corpus/archive.h"
#include "xvec/corpus/synthetic.h"
#include "xvec/pipeline/gradient-suite.h"

namespace xvec {

namespace fs = std::filesystem;

namespace {

const Split kAllSplits[] = {Split::kTrain, Split::kValidation, Split::kEnroll, Split::kTest};

std::string Join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

void RequireFile(const std::string &path, const std::string &what) {
  if (path.empty()) throw ConfigError(what + " path is required");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

std::string DataDir(const RunConfig &config, const CommandInputs &in) {
  const std::string dir = in.data_dir.empty() ? config.data_dir : in.data_dir;
  if (dir.empty()) throw ConfigError("corpus directory is required (--data or paths.data)");
  if (!fs::is_directory(dir)) throw ConfigError("corpus directory not found: " + dir);
  return dir;
}

std::string SplitArchive(const std::string &dir, Split split) { return Join(dir, std::string(SplitName(split)) + ".farc"); }
std::string SplitManifest(const std::string &dir, Split split) {
  return Join(dir, std::string(SplitName(split)) + ".manifest");
}

std::string Quote(const std::string &s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::string FileHash(const std::string &path) { return HexDigest(Fnv1a64(ReadFileBytes(path))); }

// Appends the run record to the guard's outputs and the result.
void WriteRunRecord(OutputGuard &guard, CommandResult &result, const std::string &command, const RunConfig &config,
                    const CommandInputs &in, const std::vector<std::string> &inputs) {
  std::ostringstream o;
  o << config.ToToml() << "\n[run]\n";
  o << "command = " << Quote(command) << "\n";
  o << "command_line = " << Quote(in.command_line) << "\n";
  o << "seed = " << config.seed << "\n";
  o << "inputs = [\n";
  for (const std::string &p : inputs) o << "  { path = " << Quote(p) << ", fnv1a64 = " << Quote(FileHash(p)) << " },\n";
  o << "]\noutputs = [\n";
  for (const std::string &p : guard.outputs()) {
    const std::string rel = fs::relative(p, guard.dir()).generic_string();
    o << "  { path = " << Quote(rel) << ", fnv1a64 = " << Quote(FileHash(p)) << " },\n";
  }
  o << "]\n";
  const std::string path = guard.Output(command + ".run.toml");
  WriteFileBytes(path, o.str());
  result.outputs = guard.outputs();
}

std::pair<std::string, std::string> NamedPath(const std::string &spec, const std::string &fallback_name) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || fs::exists(spec)) return {fallback_name, spec};
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

// The config as it should be recorded: with the corpus directory actually used.
RunConfig Snapshot(const RunConfig &config, const CommandInputs &in) {
  RunConfig snap = config;
  if (!in.data_dir.empty()) snap.data_dir = in.data_dir;
  return snap;
}

std::string TrialsPath(const RunConfig &config, const CommandInputs &in) {
  if (!in.trials_path.empty()) return in.trials_path;
  return Join(DataDir(config, in), "trials");
}

}  // namespace

OutputGuard::OutputGuard(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) throw ConfigError("output directory is required");
  std::vector<fs::path> missing;
  for (fs::path p = fs::absolute(dir_); !p.empty() && !fs::exists(p); p = p.parent_path()) {
    missing.push_back(p);
    if (p == p.parent_path()) break;
  }
  fs::create_directories(dir_);
  for (const fs::path &p : missing) created_dirs_.push_back(p.string());
}

OutputGuard::~OutputGuard() {
  if (committed_) return;
  std::error_code ec;
  const fs::path root = fs::absolute(dir_, ec);
  for (auto it = outputs_.rbegin(); it != outputs_.rend(); ++it) {
    fs::remove(*it, ec);
    fs::remove(*it + ".tmp", ec);
    // Drop directories emptied by the removal, up to the output root.
    for (fs::path p = fs::absolute(*it, ec).parent_path(); p != root && p.string().size() > root.string().size();
         p = p.parent_path())
      if (!fs::remove(p, ec)) break;
  }
  for (const std::string &d : created_dirs_) fs::remove(d, ec);
}

std::string OutputGuard::Output(const std::string &name) {
  const std::string path = Join(dir_, name);
  outputs_.push_back(path);
  return path;
}

std::vector<FeatureSequence> LoadCorpusSplit(const std::string &dir, Split split) {
  const std::string archive = SplitArchive(dir, split), manifest = SplitManifest(dir, split);
  RequireFile(archive, std::string(SplitName(split)) + " archive");
  RequireFile(manifest, std::string(SplitName(split)) + " manifest");
  return LoadSplit(archive, ReadManifest(manifest, split));
}

ScoreSet ScoreTrials(const BackendModel &backend, const EmbeddingSet &enroll, const EmbeddingSet &test,
                     const TrialList &trials) {
  auto transform = [&](const EmbeddingSet &set) {
    std::map<std::string, Eigen::VectorXd> out;
    EmbeddingMatrix t = backend.TransformAll(set.vectors);
    for (std::size_t i = 0; i < set.size(); ++i) out.emplace(set.utterance_ids[i], t.row(static_cast<Eigen::Index>(i)));
    return out;
  };
  const auto e = transform(enroll), t = transform(test);
  ScoreSet scores;
  scores.records.reserve(trials.trials.size());
  for (const Trial &trial : trials.trials) {
    auto ei = e.find(trial.enroll);
    auto ti = t.find(trial.test);
    if (ei == e.end()) throw DataError("trial enroll utterance '" + trial.enroll + "' has no embedding");
    if (ti == t.end()) throw DataError("trial test utterance '" + trial.test + "' has no embedding");
    scores.records.push_back({trial.enroll, trial.test, backend.ScoreTransformed(ei->second, ti->second)});
  }
  return scores;
}

CommandResult RunGenData(const RunConfig &config, const CommandInputs &in) {
  OutputGuard guard(config.out_dir);
  CommandResult result;
  for (Split s : kAllSplits) {
    guard.Output(std::string(SplitName(s)) + ".farc");
    guard.Output(std::string(SplitName(s)) + ".manifest");
  }
  guard.Output("trials");
  WriteSyntheticCorpus(config.out_dir, GenerateSyntheticCorpus(config.corpus));
  WriteRunRecord(guard, result, "gen-data", config, in, {});
  guard.Commit();
  return result;
}

CommandResult RunTrain(const RunConfig &config, const CommandInputs &in) {
  const std::string data = DataDir(config, in);
  const std::vector<std::string> inputs = {SplitArchive(data, Split::kTrain), SplitManifest(data, Split::kTrain),
                                           SplitArchive(data, Split::kValidation),
                                           SplitManifest(data, Split::kValidation)};
  for (const std::string &p : inputs) RequireFile(p, "corpus file");
  TrainData td = TrainData::FromSplits(LoadCorpusSplit(data, Split::kTrain), LoadCorpusSplit(data, Split::kValidation));

  OutputGuard guard(config.out_dir);
  CommandResult result;
  Trainer trainer(config.model, config.ResolveTrain(config.system), &td);
  trainer.Run(guard.Output("model.xvck"));
  WriteFileBytes(guard.Output("train_steps.csv"), trainer.log().StepCsv());
  WriteFileBytes(guard.Output("train_epochs.csv"), trainer.log().EpochCsv());
  result.logs.push_back(trainer.log());
  WriteRunRecord(guard, result, "train", Snapshot(config, in), in, inputs);
  guard.Commit();
  return result;
}

CommandResult RunExtract(const RunConfig &config, const CommandInputs &in) {
  RequireFile(in.model_path, "model checkpoint");
  const std::string data = DataDir(config, in);
  std::vector<Split> splits;
  if (in.splits.empty())
    splits = {Split::kTrain, Split::kEnroll, Split::kTest};
  else
    for (const std::string &s : in.splits) splits.push_back(ParseSplit(s));
  std::vector<std::string> inputs = {in.model_path};
  for (Split s : splits) {
    inputs.push_back(SplitArchive(data, s));
    inputs.push_back(SplitManifest(data, s));
  }
  for (const std::string &p : inputs) RequireFile(p, "input file");
  const XvectorModel model = LoadModelFromCheckpoint(in.model_path);

  OutputGuard guard(config.out_dir);
  CommandResult result;
  for (Split s : splits) {
    const std::string path = guard.Output(std::string(SplitName(s)) + ".xvem");
    WriteEmbeddings(path, ExtractEmbeddings(model, LoadCorpusSplit(data, s)));
  }
  WriteRunRecord(guard, result, "extract", Snapshot(config, in), in, inputs);
  guard.Commit();
  return result;
}

CommandResult RunBackendTrain(const RunConfig &config, const CommandInputs &in) {
  RequireFile(in.embeddings_path, "training embeddings");
  const EmbeddingSet train = ReadEmbeddings(in.embeddings_path);
  OutputGuard guard(config.out_dir);
  CommandResult result;
  BackendModel::Fit(train.vectors, train.SpeakerLabels(), config.backend).Save(guard.Output("backend.xvbk"));
  WriteRunRecord(guard, result, "backend-train", config, in, {in.embeddings_path});
  guard.Commit();
  return result;
}


CommandResult RunScore(const RunConfig &config, const CommandInputs &in) {
  const std::string trials_path = TrialsPath(config, in);
  RequireFile(in.backend_path, "backend model");
  RequireFile(in.enroll_path, "enroll embeddings");
  RequireFile(in.test_path, "test embeddings");
  RequireFile(trials_path, "trial list");
  const BackendModel backend = BackendModel::Load(in.backend_path);
  const ScoreSet scores =
      ScoreTrials(backend, ReadEmbeddings(in.enroll_path), ReadEmbeddings(in.test_path), ReadTrials(trials_path));
  OutputGuard guard(config.out_dir);
  CommandResult result;
  WriteScores(guard.Output("scores.txt"), scores);
  WriteRunRecord(guard, result, "score", Snapshot(config, in), in, {in.backend_path, in.enroll_path, in.test_path, trials_path});
  guard.Commit();
  return result;
}

CommandResult RunEvaluate(const RunConfig &config, const CommandInputs &in) {
  const std::string trials_path = TrialsPath(config, in);
  RequireFile(trials_path, "trial list");
  if (in.scores.empty()) throw ConfigError("evaluate needs at least one score file");
  std::vector<std::pair<std::string, std::string>> named;
  std::vector<std::string> inputs = {trials_path};
  for (const std::string &s : in.scores) {
    named.push_back(NamedPath(s, config.system));
    RequireFile(named.back().second, "score file");
    inputs.push_back(named.back().second);
  }
  const TrialList trials = ReadTrials(trials_path);
  CommandResult result;
  for (const auto &[name, path] : named) {
    for (const MetricsReport &r : result.reports)
      if (r.system == name) throw ConfigError("system '" + name + "' is evaluated twice");
    result.reports.push_back(EvaluateScores(name, ReadScores(path), trials));
  }
  OutputGuard guard(config.out_dir);
  guard.Output("report.csv");
  for (const MetricsReport &r : result.reports) guard.Output("det_" + r.system + ".csv");
  EmitReport(config.out_dir, result.reports);
  WriteRunRecord(guard, result, "evaluate", Snapshot(config, in), in, inputs);
  guard.Commit();
  return result;
}

CommandResult RunFuse(const RunConfig &config, const CommandInputs &in) {
  if (in.scores.size() != 2) throw ConfigError("fuse needs exactly two score files");
  for (const std::string &p : in.scores) RequireFile(p, "score file");
  const ScoreSet fused = FuseScores(ReadScores(in.scores[0]), ReadScores(in.scores[1]));
  OutputGuard guard(config.out_dir);
  CommandResult result;
  WriteScores(guard.Output("scores.txt"), fused);
  WriteRunRecord(guard, result, "fuse", config, in, in.scores);
  guard.Commit();
  return result;
}

CommandResult RunGradCheck(const RunConfig &config, const CommandInputs &in) {
  const std::vector<GradSuiteEntry> entries = RunGradientSuite(config.seed);
  std::ostringstream csv;
  csv << "name,max_rel_error,num_checked,pass\n";
  CommandResult result;
  char buf[32];
  for (const GradSuiteEntry &e : entries) {
    const bool pass = e.max_rel_error < kGradSuiteTolerance;
    result.ok = result.ok && pass;
    std::snprintf(buf, sizeof(buf), "%.3e", e.max_rel_error);
    csv << e.name << ',' << buf << ',' << e.num_checked << ',' << (pass ? 1 : 0) << '\n';
  }
  OutputGuard guard(config.out_dir);
  WriteFileBytes(guard.Output("gradcheck.csv"), csv.str());
  WriteRunRecord(guard, result, "gradcheck", config, in, {});
  guard.Commit();
  return result;
}

CommandResult RunPipeline(const RunConfig &config, const CommandInputs &in) {
  OutputGuard guard(config.out_dir);
  CommandResult result;
  auto adopt = [&](const CommandResult &r) {
    for (const std::string &p : r.outputs) guard.Output(fs::relative(p, config.out_dir).string());
  };
  auto sub = [&](const std::string &dir) {
    RunConfig c = config;
    c.out_dir = Join(config.out_dir, dir);
    return c;
  };
  CommandInputs base = in;
  if (base.data_dir.empty()) base.data_dir = config.data_dir;
  if (base.data_dir.empty()) {
    base.data_dir = Join(config.out_dir, "data");
    adopt(RunGenData(sub("data"), base));
  }
  const std::string trials = base.trials_path.empty() ? Join(base.data_dir, "trials") : base.trials_path;

  std::map<std::string, std::string> score_paths;
  for (const std::string &system : config.PipelineSystems()) {
    RunConfig c = sub(system);
    c.system = system;
    CommandResult trained = RunTrain(c, base);
    adopt(trained);
    result.logs.push_back(trained.logs.front());

    CommandInputs ex = base;
    ex.model_path = Join(c.out_dir, "model.xvck");
    adopt(RunExtract(c, ex));

    CommandInputs bk = base;
    bk.embeddings_path = Join(c.out_dir, "train.xvem");
    adopt(RunBackendTrain(c, bk));

    CommandInputs sc = base;
    sc.backend_path = Join(c.out_dir, "backend.xvbk");
    sc.enroll_path = Join(c.out_dir, "enroll.xvem");
    sc.test_path = Join(c.out_dir, "test.xvem");
    sc.trials_path = trials;
    adopt(RunScore(c, sc));
    score_paths[system] = Join(c.out_dir, "scores.txt");
  }

  std::vector<std::string> named;
  for (const std::string &system : config.PipelineSystems()) named.push_back(system + "=" + score_paths[system]);
  if (score_paths.count("GNCN-F0-FC") && score_paths.count("GNCN-F1-FC")) {
    CommandInputs fu = base;
    fu.scores = {score_paths["GNCN-F0-FC"], score_paths["GNCN-F1-FC"]};
    adopt(RunFuse(sub("GNCN-Fusion"), fu));
    named.push_back("GNCN-Fusion=" + Join(Join(config.out_dir, "GNCN-Fusion"), "scores.txt"));
  }
  CommandInputs ev = base;
  ev.trials_path = trials;
  ev.scores = named;
  CommandResult evaluated = RunEvaluate(sub("report"), ev);
  adopt(evaluated);
  result.reports = evaluated.reports;

  WriteRunRecord(guard, result, "pipeline", config, in, {});
  guard.Commit();
  return result;
}

std::vector<std::string> CommandNames() {
  return {"gen-data", "train", "extract", "backend-train", "score", "evaluate", "fuse", "gradcheck", "pipeline"};
}

CommandResult RunCommand(const std::string &command, const RunConfig &config, const CommandInputs &in) {
  static const std::map<std::string, std::function<CommandResult(const RunConfig &, const CommandInputs &)>> kTable = {
      {"gen-data", RunGenData},   {"train", RunTrain}, {"extract", RunExtract},     {"backend-train", RunBackendTrain},
      {"score", RunScore},        {"evaluate", RunEvaluate}, {"fuse", RunFuse},     {"gradcheck", RunGradCheck},
      {"pipeline", RunPipeline}};
  auto it = kTable.find(command);
  if (it == kTable.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second(config, in);
}

}  // namespace xvec
