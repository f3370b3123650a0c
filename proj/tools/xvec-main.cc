// tools/xvec-main.cc

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

// xvec: command-line driver for corpus generation, training, embedding
// extraction, PLDA backend training, scoring and evaluation.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/base/process.h"
#include "xvec/pipeline/commands.h"
#include "xvec/pipeline/run-config.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitNumeric = 2;

std::string TomlString(const std::string &s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::string OneLine(std::string s) {
  for (char &ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

int Fail(int code, const std::string &what) {
  std::cerr << "xvec: error: " << OneLine(what) << "\n";
  return code;
}

}  // namespace

int main(int argc, char **argv) {
  xvec::TuneAllocator();

  CLI::App app{"x-vector speaker verification toolkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, system, out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "TOML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed");
  app.add_option("--system", system, "System preset, e.g. x-vector, GTM, GNCN-F1-FC");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", overrides, "Config override key=value (dotted keys)");

  xvec::CommandInputs in;
  std::vector<std::string> systems;
  std::vector<CLI::App *> commands;
  auto add = [&](const std::string &name, const std::string &help) {
    commands.push_back(app.add_subcommand(name, help));
    return commands.back();
  };
  add("gen-data", "Write a synthetic corpus (archives, manifests, trials)");
  CLI::App *train = add("train", "Train the configured system");
  train->add_option("--data", in.data_dir, "Corpus directory");
  CLI::App *extract = add("extract", "Extract embeddings for corpus splits");
  extract->add_option("--model", in.model_path, "Model checkpoint")->required();
  extract->add_option("--data", in.data_dir, "Corpus directory");
  extract->add_option("--split", in.splits, "Split names (default: train enroll test)");
  CLI::App *backend = add("backend-train", "Fit center, LDA, length norm and PLDA");
  backend->add_option("--embeddings", in.embeddings_path, "Training embeddings (.xvem)")->required();
  CLI::App *score = add("score", "Score a trial list with a backend");
  score->add_option("--backend", in.backend_path, "Backend model")->required();
  score->add_option("--enroll", in.enroll_path, "Enrollment embeddings")->required();
  score->add_option("--test", in.test_path, "Test embeddings")->required();
  score->add_option("--trials", in.trials_path, "Trial list (default: <data>/trials)");
  score->add_option("--data", in.data_dir, "Corpus directory");
  CLI::App *evaluate = add("evaluate", "EER, minDCF and DET points for score files");
  evaluate->add_option("--scores", in.scores, "Score files, PATH or NAME=PATH")->required();
  evaluate->add_option("--trials", in.trials_path, "Trial list (default: <data>/trials)");
  evaluate->add_option("--data", in.data_dir, "Corpus directory");
  CLI::App *fuse = add("fuse", "Equal-weight fusion of two score files");
  fuse->add_option("--scores", in.scores, "Two score files")->required()->expected(2);
  add("gradcheck", "Finite-difference gradient suite");
  CLI::App *pipeline = add("pipeline", "Every stage for each configured system");
  pipeline->add_option("--data", in.data_dir, "Existing corpus directory (default: generate one)");
  pipeline->add_option("--systems", systems, "Systems to train (default: pipeline.systems)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  std::string command;
  for (CLI::App *c : commands)
    if (c->parsed()) command = c->get_name();
  for (int i = 0; i < argc; ++i) in.command_line += (i ? " " : "") + std::string(argv[i]);

  try {
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (!system.empty()) overrides.push_back("system=" + TomlString(system));
    if (!out_dir.empty()) overrides.push_back("paths.out=" + TomlString(out_dir));
    if (!systems.empty()) {
      std::string list = "pipeline.systems=[";
      for (std::size_t i = 0; i < systems.size(); ++i) list += (i ? "," : "") + TomlString(systems[i]);
      overrides.push_back(list + "]");
    }
    std::string text;
    if (!config_path.empty()) {
      try {
        text = xvec::ReadFileBytes(config_path);
      } catch (const xvec::Error &e) {
        throw xvec::ConfigError(e.what());
      }
    }
    const xvec::RunConfig config =
        xvec::ParseRunConfigWithOverrides(text, config_path.empty() ? "<defaults>" : config_path, overrides);
    const xvec::CommandResult result = xvec::RunCommand(command, config, in);
    if (!result.reports.empty()) std::cout << xvec::ReportCsv(result.reports);
    if (!result.ok) return Fail(kExitNumeric, "gradient check failed; see " + config.out_dir + "/gradcheck.csv");
    std::cerr << "xvec: " << command << ": wrote " << result.outputs.size() << " files under " << config.out_dir << "\n";
    return kExitOk;
  } catch (const xvec::NumericError &e) {
    return Fail(kExitNumeric, e.what());
  } catch (const std::exception &e) {
    return Fail(kExitUser, e.what());
  }
}
