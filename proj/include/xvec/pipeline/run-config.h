// include/xvec/pipeline/run-config.h

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

#ifndef XVEC_PIPELINE_RUN_CONFIG_H_
#define XVEC_PIPELINE_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xvec/backend/backend.h"
#include "xvec/corpus/synthetic.h"
#include "xvec/model/model-spec.h"
#include "xvec/trainer/trainer.h"

namespace xvec {

/// Settings for a whole experiment, read from a TOML file with one table per
/// module: [paths], [corpus], [model], [aux], [gtm], [train], [backend],
/// [pipeline]. Top-level keys are `seed` and `system`.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string system = "x-vector";

  std::string data_dir;  // corpus directory; empty means "<out>/data" for pipeline
  std::string out_dir = "out";

  SyntheticCorpusOptions corpus;
  ModelSpec model;

  // Overrides applied on top of the system preset. Unset fields keep the
  // preset value.
  std::optional<std::size_t> aux_projection_dim;
  std::optional<NoiseMode> aux_noise_mode;
  std::optional<NormConvention> aux_norm;
  std::optional<double> gtm_alpha;
  std::optional<NormConvention> gtm_norm;

  TrainConfig train;
  BackendConfig backend;

  /// Systems trained by the pipeline command; empty means just `system`.
  std::vector<std::string> pipeline_systems;

  /// Throws ConfigError on an unknown system or invalid values.
  void Validate() const;
  /// Preset for `name` with the [aux] and [gtm] overrides applied.
  SystemConfig ResolveSystem(const std::string &name) const;
  /// Training settings for `name` with the global seed.
  TrainConfig ResolveTrain(const std::string &name) const;
  std::vector<std::string> PipelineSystems() const;

  /// Complete TOML rendering. Parsing it back yields an equal config.
  std::string ToToml() const;
};

/// Parses TOML text. Unknown tables or keys and wrongly typed values throw
/// ConfigError naming the key.
RunConfig ParseRunConfig(const std::string &text, const std::string &source = "<config>");
RunConfig LoadRunConfig(const std::string &path);

/// Applies `key=value` overrides (dotted keys, TOML values; a value that is
/// not valid TOML is taken as a string) on top of `text`, then parses.
RunConfig ParseRunConfigWithOverrides(const std::string &text, const std::string &source,
                                      const std::vector<std::string> &overrides);

}  // namespace xvec

#endif  // XVEC_PIPELINE_RUN_CONFIG_H_
