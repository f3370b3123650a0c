// src/pipeline/run-config.cc

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

#include "xvec/pipeline/run-config.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>
#include <type_traits>

#include <toml.hpp>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"

namespace xvec {

namespace {

std::string_view LengthNormName(LengthNorm n) {
  switch (n) {
    case LengthNorm::kSqrtDim: return "sqrt-dim";
    case LengthNorm::kUnit: return "unit";
    case LengthNorm::kNone: return "none";
  }
  return "?";
}

LengthNorm ParseLengthNorm(std::string_view s) {
  if (s == "sqrt-dim") return LengthNorm::kSqrtDim;
  if (s == "unit") return LengthNorm::kUnit;
  if (s == "none") return LengthNorm::kNone;
  throw ConfigError("unknown length_norm '" + std::string(s) + "' (expected sqrt-dim, unit or none)");
}

// Reads typed values out of one table and remembers which keys were used,
// so leftovers can be reported as unknown.
class TableReader {
 public:
  TableReader(const toml::table *table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  const toml::node *Find(const std::string &key) {
    if (!table_) return nullptr;
    used_.insert(key);
    return table_->get(key);
  }

  template <typename T>
  void Unsigned(const std::string &key, T *out) {
    if (const toml::node *n = Find(key)) {
      auto v = n->value<std::int64_t>();
      if (!n->is_integer() || !v || *v < 0) Fail(key, "a non-negative integer");
      *out = static_cast<T>(*v);
    }
  }

  template <typename T>
  void Unsigned(const std::string &key, std::optional<T> *out) {
    if (Find(key)) {
      T v{};
      Unsigned(key, &v);
      *out = v;
    }
  }

  void Real(const std::string &key, double *out) {
    if (const toml::node *n = Find(key)) {
      if (!n->is_number()) Fail(key, "a number");
      *out = *n->value<double>();
    }
  }

  void Real(const std::string &key, std::optional<double> *out) {
    if (Find(key)) {
      double v = 0.0;
      Real(key, &v);
      *out = v;
    }
  }

  bool String(const std::string &key, std::string *out) {
    if (const toml::node *n = Find(key)) {
      if (!n->is_string()) Fail(key, "a string");
      *out = *n->value<std::string>();
      return true;
    }
    return false;
  }

  template <typename T, typename Parse>
  void Enum(const std::string &key, T *out, Parse parse) {
    std::string s;
    if (String(key, &s)) {
      try {
        *out = parse(s);
      } catch (const ConfigError &e) {
        throw ConfigError(Name(key) + ": " + e.what());
      }
    }
  }

  template <typename T, typename Parse>
  void Enum(const std::string &key, std::optional<T> *out, Parse parse) {
    if (table_ && table_->contains(key)) {
      T v{};
      Enum(key, &v, parse);
      *out = v;
    } else {
      used_.insert(key);
    }
  }

  bool UnsignedArray(const std::string &key, std::vector<std::size_t> *out) {
    const toml::node *n = Find(key);
    if (!n) return false;
    const toml::array *a = n->as_array();
    if (!a) Fail(key, "an array of non-negative integers");
    out->clear();
    for (const toml::node &e : *a) {
      auto v = e.value<std::int64_t>();
      if (!e.is_integer() || !v || *v < 0) Fail(key, "an array of non-negative integers");
      out->push_back(static_cast<std::size_t>(*v));
    }
    return true;
  }

  void StringArray(const std::string &key, std::vector<std::string> *out) {
    const toml::node *n = Find(key);
    if (!n) return;
    const toml::array *a = n->as_array();
    if (!a) Fail(key, "an array of strings");
    out->clear();
    for (const toml::node &e : *a) {
      if (!e.is_string()) Fail(key, "an array of strings");
      out->push_back(*e.value<std::string>());
    }
  }

  void CheckUnknown() const {
    if (!table_) return;
    for (auto &&[k, v] : *table_)
      if (!used_.count(std::string(k.str()))) throw ConfigError("unknown config key '" + Name(std::string(k.str())) + "'");
  }

 private:
  std::string Name(const std::string &key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  [[noreturn]] void Fail(const std::string &key, const std::string &expected) const {
    throw ConfigError("config key '" + Name(key) + "' must be " + expected);
  }

  const toml::table *table_;
  std::string prefix_;
  std::set<std::string> used_;
};

const toml::table *SubTable(const toml::table &root, const std::string &name) {
  const toml::node *n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError("config key '" + name + "' must be a table");
  return n->as_table();
}

toml::table ParseToml(const std::string &text, const std::string &source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error &e) {
    throw ConfigError(source + ":" + std::to_string(e.source().begin.line) + ": " + std::string(e.description()));
  }
}

RunConfig FromTable(const toml::table &root) {
  RunConfig c;
  // [run] holds the provenance written into run records and is ignored here.
  static const std::set<std::string> kTables = {"paths", "corpus",  "model",    "aux", "gtm",
                                                "train", "backend", "pipeline", "run"};
  TableReader top(&root, "");
  top.Unsigned("seed", &c.seed);
  top.String("system", &c.system);
  for (const std::string &t : kTables) top.Find(t);
  top.CheckUnknown();

  TableReader paths(SubTable(root, "paths"), "paths");
  paths.String("data", &c.data_dir);
  paths.String("out", &c.out_dir);
  paths.CheckUnknown();

  TableReader corpus(SubTable(root, "corpus"), "corpus");
  SyntheticCorpusOptions &o = c.corpus;
  corpus.Unsigned("seed", &o.seed);
  corpus.Unsigned("train_speakers", &o.train_speakers);
  corpus.Unsigned("train_utts_per_speaker", &o.train_utts_per_speaker);
  corpus.Unsigned("validation_utts_per_speaker", &o.validation_utts_per_speaker);
  corpus.Unsigned("eval_speakers", &o.eval_speakers);
  corpus.Unsigned("eval_utts_per_speaker", &o.eval_utts_per_speaker);
  corpus.Unsigned("enroll_utts_per_speaker", &o.enroll_utts_per_speaker);
  corpus.Unsigned("min_frames", &o.min_frames);
  corpus.Unsigned("max_frames", &o.max_frames);
  corpus.Unsigned("dim", &o.world.dim);
  corpus.Unsigned("num_phones", &o.world.num_phones);
  corpus.Real("phone_spread", &o.world.phone_spread);
  corpus.Real("speaker_transform", &o.world.speaker_transform);
  corpus.Real("speaker_offset", &o.world.speaker_offset);
  corpus.Real("channel_offset", &o.world.channel_offset);
  corpus.Real("frame_noise", &o.world.frame_noise);
  corpus.Unsigned("min_segment", &o.world.min_segment);
  corpus.Unsigned("max_segment", &o.world.max_segment);
  corpus.CheckUnknown();

  TableReader model(SubTable(root, "model"), "model");
  ModelSpec &m = c.model;
  model.Unsigned("feature_dim", &m.feature_dim);
  std::vector<std::size_t> dims, kernels, dilations;
  const bool has_dims = model.UnsignedArray("frame_dims", &dims);
  const bool has_kernels = model.UnsignedArray("frame_kernels", &kernels);
  const bool has_dilations = model.UnsignedArray("frame_dilations", &dilations);
  for (auto [present, values, field] : {std::tuple{has_dims, &dims, 0}, std::tuple{has_kernels, &kernels, 1},
                                        std::tuple{has_dilations, &dilations, 2}}) {
    if (!present) continue;
    if (values->size() != m.frame_layers.size())
      throw ConfigError("config arrays model.frame_dims, frame_kernels and frame_dilations need " +
                        std::to_string(m.frame_layers.size()) + " entries");
    for (std::size_t i = 0; i < values->size(); ++i) {
      FrameLayerSpec &l = m.frame_layers[i];
      (field == 0 ? l.out_dim : field == 1 ? l.kernel : l.dilation) = (*values)[i];
    }
  }
  model.UnsignedArray("embed_dims", &m.embed_dims);
  model.Real("bn_momentum", &m.bn_momentum);
  model.Real("bn_epsilon", &m.bn_epsilon);
  model.CheckUnknown();

  TableReader aux(SubTable(root, "aux"), "aux");
  aux.Unsigned("projection_dim", &c.aux_projection_dim);
  aux.Enum("noise_mode", &c.aux_noise_mode, ParseNoiseMode);
  aux.Enum("norm", &c.aux_norm, ParseNorm);
  aux.CheckUnknown();

  TableReader gtm(SubTable(root, "gtm"), "gtm");
  gtm.Real("alpha", &c.gtm_alpha);
  gtm.Enum("norm", &c.gtm_norm, ParseNorm);
  gtm.CheckUnknown();

  TableReader train(SubTable(root, "train"), "train");
  TrainConfig &t = c.train;
  train.Unsigned("epochs", &t.epochs);
  train.Unsigned("batch_size", &t.batch_size);
  train.Unsigned("min_crop", &t.min_crop);
  train.Unsigned("max_crop", &t.max_crop);
  train.Real("lr_initial", &t.lr_initial);
  train.Real("lr_final", &t.lr_final);
  train.Real("weight_decay", &t.weight_decay);
  train.Real("lambda_initial", &t.lambda_initial);
  train.Real("lambda_decay_factor", &t.lambda_decay_factor);
  train.Real("lambda_floor", &t.lambda_floor);
  train.Unsigned("patience", &t.patience);
  train.Unsigned("validation_max_frames", &t.validation_max_frames);
  train.CheckUnknown();

  TableReader backend(SubTable(root, "backend"), "backend");
  backend.Unsigned("lda_dim", &c.backend.lda_dim);
  backend.Real("lda_shrinkage", &c.backend.lda_shrinkage);
  backend.Unsigned("plda_iterations", &c.backend.plda_iterations);
  backend.Enum("length_norm", &c.backend.length_norm, ParseLengthNorm);
  backend.CheckUnknown();

  TableReader pipeline(SubTable(root, "pipeline"), "pipeline");
  pipeline.StringArray("systems", &c.pipeline_systems);
  pipeline.CheckUnknown();

  c.Validate();
  return c;
}

void MergeInto(toml::table &base, const toml::table &patch) {
  for (auto &&[k, v] : patch) {
    toml::node *existing = base.get(k.str());
    if (existing && existing->is_table() && v.is_table())
      MergeInto(*existing->as_table(), *v.as_table());
    else
      base.insert_or_assign(k, v);
  }
}

toml::table ParseOverride(const std::string &assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
  try {
    return toml::parse(key + " = " + value, std::string_view("--set"));
  } catch (const toml::parse_error &) {
  }
  std::string quoted = "\"";
  for (char ch : value) {
    if (ch == '"' || ch == '\\') quoted += '\\';
    quoted += ch;
  }
  quoted += '"';
  try {
    return toml::parse(key + " = " + quoted, std::string_view("--set"));
  } catch (const toml::parse_error &e) {
    throw ConfigError("override '" + assignment + "': " + std::string(e.description()));
  }
}

std::string Real(double v) {
  if (!std::isfinite(v)) throw ConfigError("cannot render a non-finite config value");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s = buf;
  // Shortest form that still round-trips.
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof(buf), "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string Quote(const std::string &s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

template <typename T>
std::string Array(const std::vector<T> &v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, std::string>)
      out += Quote(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out + "]";
}

}  // namespace

void RunConfig::Validate() const {
  for (const std::string &name : PipelineSystems()) ResolveTrain(name).Validate();
  ModelSpec spec = model;
  spec.num_speakers = 2;
  spec.Validate();
  if (model.feature_dim != corpus.world.dim)
    throw ConfigError("model.feature_dim (" + std::to_string(model.feature_dim) + ") differs from corpus.dim (" +
                      std::to_string(corpus.world.dim) + ")");
  if (corpus.min_frames == 0 || corpus.min_frames > corpus.max_frames) throw ConfigError("invalid corpus frame range");
  if (corpus.world.min_segment == 0 || corpus.world.min_segment > corpus.world.max_segment)
    throw ConfigError("invalid corpus segment range");
  if (backend.lda_dim == 0) throw ConfigError("backend.lda_dim must be positive");
  if (!(backend.lda_shrinkage > 0.0) || !std::isfinite(backend.lda_shrinkage))
    throw ConfigError("backend.lda_shrinkage must be positive and finite");
  if (out_dir.empty()) throw ConfigError("paths.out must not be empty");
}

SystemConfig RunConfig::ResolveSystem(const std::string &name) const {
  SystemConfig sys = SystemPreset(name);
  if (sys.aux) {
    if (aux_projection_dim) sys.aux->projection_dim = *aux_projection_dim;
    if (aux_noise_mode) sys.aux->noise_mode = *aux_noise_mode;
    if (aux_norm) sys.aux->norm = *aux_norm;
    sys.aux->lambda = train.lambda_initial;
    if (sys.aux->mode == AuxMode::kF1 && sys.aux->projection_dim == 0)
      throw ConfigError("aux.projection_dim must be positive");
  }
  if (gtm_alpha) {
    if (*gtm_alpha < 0.0) throw ConfigError("gtm.alpha must be non-negative");
    sys.gtm_alpha = *gtm_alpha;
  }
  if (gtm_norm) sys.gtm_norm = *gtm_norm;
  return sys;
}

TrainConfig RunConfig::ResolveTrain(const std::string &name) const {
  TrainConfig t = train;
  t.seed = seed;
  t.system = ResolveSystem(name);
  return t;
}

std::vector<std::string> RunConfig::PipelineSystems() const {
  return pipeline_systems.empty() ? std::vector<std::string>{system} : pipeline_systems;
}

std::string RunConfig::ToToml() const {
  std::ostringstream o;
  o << "seed = " << seed << "\n";
  o << "system = " << Quote(system) << "\n\n";
  o << "[paths]\n";
  o << "data = " << Quote(data_dir) << "\n";
  o << "out = " << Quote(out_dir) << "\n\n";
  const SyntheticCorpusOptions &c = corpus;
  o << "[corpus]\n";
  o << "seed = " << c.seed << "\n";
  o << "train_speakers = " << c.train_speakers << "\n";
  o << "train_utts_per_speaker = " << c.train_utts_per_speaker << "\n";
  o << "validation_utts_per_speaker = " << c.validation_utts_per_speaker << "\n";
  o << "eval_speakers = " << c.eval_speakers << "\n";
  o << "eval_utts_per_speaker = " << c.eval_utts_per_speaker << "\n";
  o << "enroll_utts_per_speaker = " << c.enroll_utts_per_speaker << "\n";
  o << "min_frames = " << c.min_frames << "\n";
  o << "max_frames = " << c.max_frames << "\n";
  o << "dim = " << c.world.dim << "\n";
  o << "num_phones = " << c.world.num_phones << "\n";
  o << "phone_spread = " << Real(c.world.phone_spread) << "\n";
  o << "speaker_transform = " << Real(c.world.speaker_transform) << "\n";
  o << "speaker_offset = " << Real(c.world.speaker_offset) << "\n";
  o << "channel_offset = " << Real(c.world.channel_offset) << "\n";
  o << "frame_noise = " << Real(c.world.frame_noise) << "\n";
  o << "min_segment = " << c.world.min_segment << "\n";
  o << "max_segment = " << c.world.max_segment << "\n\n";
  std::vector<std::size_t> dims, kernels, dilations;
  for (const FrameLayerSpec &l : model.frame_layers) {
    dims.push_back(l.out_dim);
    kernels.push_back(l.kernel);
    dilations.push_back(l.dilation);
  }
  o << "[model]\n";
  o << "feature_dim = " << model.feature_dim << "\n";
  o << "frame_dims = " << Array(dims) << "\n";
  o << "frame_kernels = " << Array(kernels) << "\n";
  o << "frame_dilations = " << Array(dilations) << "\n";
  o << "embed_dims = " << Array(model.embed_dims) << "\n";
  o << "bn_momentum = " << Real(model.bn_momentum) << "\n";
  o << "bn_epsilon = " << Real(model.bn_epsilon) << "\n\n";
  o << "[aux]\n";
  if (aux_projection_dim) o << "projection_dim = " << *aux_projection_dim << "\n";
  if (aux_noise_mode) o << "noise_mode = " << Quote(std::string(NoiseModeName(*aux_noise_mode))) << "\n";
  if (aux_norm) o << "norm = " << Quote(std::string(NormName(*aux_norm))) << "\n";
  o << "\n[gtm]\n";
  if (gtm_alpha) o << "alpha = " << Real(*gtm_alpha) << "\n";
  if (gtm_norm) o << "norm = " << Quote(std::string(NormName(*gtm_norm))) << "\n";
  const TrainConfig &t = train;
  o << "\n[train]\n";
  o << "epochs = " << t.epochs << "\n";
  o << "batch_size = " << t.batch_size << "\n";
  o << "min_crop = " << t.min_crop << "\n";
  o << "max_crop = " << t.max_crop << "\n";
  o << "lr_initial = " << Real(t.lr_initial) << "\n";
  o << "lr_final = " << Real(t.lr_final) << "\n";
  o << "weight_decay = " << Real(t.weight_decay) << "\n";
  o << "lambda_initial = " << Real(t.lambda_initial) << "\n";
  o << "lambda_decay_factor = " << Real(t.lambda_decay_factor) << "\n";
  o << "lambda_floor = " << Real(t.lambda_floor) << "\n";
  o << "patience = " << t.patience << "\n";
  o << "validation_max_frames = " << t.validation_max_frames << "\n\n";
  o << "[backend]\n";
  o << "lda_dim = " << backend.lda_dim << "\n";
  o << "lda_shrinkage = " << Real(backend.lda_shrinkage) << "\n";
  o << "plda_iterations = " << backend.plda_iterations << "\n";
  o << "length_norm = " << Quote(std::string(LengthNormName(backend.length_norm))) << "\n\n";
  o << "[pipeline]\n";
  o << "systems = " << Array(pipeline_systems) << "\n";
  return o.str();
}

RunConfig ParseRunConfig(const std::string &text, const std::string &source) {
  return FromTable(ParseToml(text, source));
}

RunConfig LoadRunConfig(const std::string &path) {
  std::string text;
  try {
    text = ReadFileBytes(path);
  } catch (const Error &e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  return ParseRunConfig(text, path);
}

RunConfig ParseRunConfigWithOverrides(const std::string &text, const std::string &source,
                                      const std::vector<std::string> &overrides) {
  toml::table root = ParseToml(text, source);
  for (const std::string &o : overrides) MergeInto(root, ParseOverride(o));
  return FromTable(root);
}

}  // namespace xvec
