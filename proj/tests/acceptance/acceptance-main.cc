// tests/acceptance/acceptance-main.cc

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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
//
// Usage: acceptance [--out DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xvec/backend/backend.h"
#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"
#include "xvec/base/process.h"
#include "xvec/corpus/synthetic.h"
#include "xvec/diff/graph.h"
#include "xvec/diff/ops.h"
#include "xvec/evalkit/evalkit.h"
#include "xvec/model/objective.h"
#include "xvec/pipeline/commands.h"
#include "xvec/pipeline/gradient-suite.h"
#include "xvec/pipeline/run-config.h"
#include "xvec/trainer/trainer.h"

using namespace xvec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string ConfigPath(const std::string &name) { return std::string(XVEC_SOURCE_DIR) + "/configs/" + name; }

// ---------------------------------------------------------------------------
// 1. Gradient suite.

Outcome GradientSuite() {
  const auto start = Clock::now();
  const std::vector<GradSuiteEntry> entries = RunGradientSuite(1);
  const double elapsed = Seconds(start);
  double worst = 0.0;
  std::string worst_name;
  std::set<std::string> names;
  for (const GradSuiteEntry &e : entries) {
    names.insert(e.name.substr(0, e.name.find('/')));
    if (!(e.max_rel_error <= worst)) {
      worst = e.max_rel_error;
      worst_name = e.name;
    }
  }
  const std::vector<std::string> required = {"affine", "relu", "stats_pool", "softmax_cross_entropy", "mse_sq",
                                             "gather_columns", "row_norms", "total_loss", "dilated_conv1d(d=1)",
                                             "batchnorm1d(train)", "gtm_regularizer(squared)", "aux_mse(literal)"};
  std::vector<std::string> missing;
  for (const std::string &r : required)
    if (!names.count(r)) missing.push_back(r);
  std::set<std::string> systems;
  for (const GradSuiteEntry &e : entries)
    if (e.name.rfind("end_to_end/", 0) == 0) systems.insert(e.name.substr(11));
  for (const char *mode : {"F0", "F1"})
    for (const char *tap : {"IN", "FC", "AF", "BN"})
      if (!systems.count(std::string("GNCN-") + mode + "-" + tap)) missing.push_back(std::string("GNCN-") + mode + "-" + tap);
  for (const char *s : {"x-vector", "GTM"})
    if (!systems.count(s)) missing.push_back(s);
  Outcome o;
  o.pass = worst < kGradSuiteTolerance && elapsed < 120.0 && missing.empty();
  o.detail = std::to_string(entries.size()) + " checks, worst " + Fmt("%.2e", worst) + " (" + worst_name + "), " +
             Fmt("%.1f", elapsed) + " s";
  for (const std::string &m : missing) o.detail += ", missing " + m;
  return o;
}

// ---------------------------------------------------------------------------
// 2. Loss formulas against direct arithmetic.

double Rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

diff::Tensor RandomTensor(diff::Shape shape, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  diff::Tensor t(std::move(shape));
  for (double &v : t.values()) v = n(rng);
  return t;
}

Outcome LossFormulas() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> small(1, 6);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = static_cast<std::size_t>(small(rng)) + 1, e = static_cast<std::size_t>(small(rng)),
                      s = static_cast<std::size_t>(small(rng)) + 1;
    std::vector<int> labels(n);
    for (int &l : labels) l = static_cast<int>(rng() % s);
    const diff::Tensor f = RandomTensor({n, e}, rng), theta = RandomTensor({e, s}, rng);
    const std::size_t d0 = static_cast<std::size_t>(small(rng)), d1 = static_cast<std::size_t>(small(rng));
    const std::vector<diff::Tensor> v = {RandomTensor({n, d0}, rng), RandomTensor({n, d1}, rng)};
    const std::vector<diff::Tensor> g = {RandomTensor({n, d0}, rng), RandomTensor({n, d1}, rng)};
    const double ce = std::abs(RandomTensor({1}, rng)[0]) + 0.5;
    const double lambda = std::uniform_real_distribution<double>(0.0, 2.0)(rng);

    for (NormConvention norm : {NormConvention::kSquared, NormConvention::kLiteral}) {
      const bool squared = norm == NormConvention::kSquared;
      // Regularizer: sum over utterances of ||f_n - theta_{s(n)}||.
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < e; ++j) {
          const double d = f[i * e + j] - theta[j * s + static_cast<std::size_t>(labels[i])];
          sq += d * d;
        }
        r += squared ? sq : std::sqrt(sq);
      }
      // Auxiliary MSE: (1/N) sum_l sum_n ||v_n^l - g_n^l||, nothing else.
      double mse = 0.0;
      for (std::size_t l = 0; l < 2; ++l) {
        const std::size_t d = l == 0 ? d0 : d1;
        for (std::size_t i = 0; i < n; ++i) {
          double sq = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double diff = v[l][i * d + j] - g[l][i * d + j];
            sq += diff * diff;
          }
          mse += squared ? sq : std::sqrt(sq);
        }
      }
      mse /= static_cast<double>(n);

      diff::Graph graph;
      const double r_lib = GtmRegularizer(graph.Constant(f), graph.Constant(theta), labels, norm).value()[0];
      std::vector<diff::Var> proj = {graph.Constant(v[0]), graph.Constant(v[1])};
      diff::Var aux = AuxMseLoss(proj, g, norm);
      diff::Var ce_var = graph.Constant(diff::Tensor::Scalar(ce));
      const double total_lib = TotalLoss(ce_var, aux, lambda).value()[0];
      worst = std::max({worst, Rel(r_lib, r), Rel(aux.value()[0], mse), Rel(total_lib, ce + lambda * mse)});
    }
  }

  // The same composition through a network forward pass (GNCN-F1-FC).
  ModelSpec spec;
  spec.feature_dim = 6;
  spec.frame_layers = {{8, 3, 1}, {8, 3, 2}, {8, 1, 1}, {8, 1, 1}, {12, 1, 1}};
  spec.embed_dims = {10, 10};
  spec.num_speakers = 4;
  SystemConfig sys = SystemPreset("GNCN-F1-FC");
  sys.aux->projection_dim = 5;
  XvectorModel model = XvectorModel::Build(SpecForSystem(spec, sys), sys.aux, 7);
  const std::size_t n = 5, t = 20;
  const diff::Tensor batch = RandomTensor({n, t, spec.feature_dim}, rng);
  const std::vector<int> labels = {0, 1, 2, 3, 1};
  const std::vector<diff::Tensor> targets = {RandomTensor({n, 5}, rng), RandomTensor({n, 5}, rng)};
  diff::Graph graph;
  const ForwardRecord rec = model.Forward(graph, batch, diff::Mode::kTrain, false);
  const double lambda = 0.37;
  const LossTerms terms = ComputeLoss(model, graph, rec, labels, sys, lambda, targets);
  double ce = 0.0;
  const diff::Tensor &logits = rec.logits.value();
  for (std::size_t i = 0; i < n; ++i) {
    double m = -1e300;
    for (std::size_t k = 0; k < 4; ++k) m = std::max(m, logits[i * 4 + k]);
    double z = 0.0;
    for (std::size_t k = 0; k < 4; ++k) z += std::exp(logits[i * 4 + k] - m);
    ce += m + std::log(z) - logits[i * 4 + static_cast<std::size_t>(labels[i])];
  }
  ce /= static_cast<double>(n);
  std::map<std::string, const diff::Tensor *> params;
  for (const NamedParameter &p : model.NamedParameters()) params[p.name] = p.tensor;
  double mse = 0.0;
  for (std::size_t l = 0; l < 2; ++l) {
    const diff::Tensor &x = rec.taps[l].fc.value();
    const diff::Tensor &w = *params["aux" + std::to_string(l + 6) + ".weight"];
    const diff::Tensor &b = *params["aux" + std::to_string(l + 6) + ".bias"];
    const std::size_t in = 10, out = 5;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        double y = b[j];
        for (std::size_t k = 0; k < in; ++k) y += x[i * in + k] * w[k * out + j];
        const double d = y - targets[l][i * out + j];
        sq += d * d;
      }
      mse += sq;
    }
  }
  mse /= static_cast<double>(n);
  const double e2e = std::max({Rel(terms.ce.value()[0], ce), Rel(terms.aux_value(), mse),
                               Rel(terms.total.value()[0], ce + lambda * mse)});
  worst = std::max(worst, e2e);
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = "100 instances x 2 norm conventions plus a network pass, worst relative deviation " + Fmt("%.2e", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 3. PLDA against a brute-force joint Gaussian likelihood ratio.

double LogGauss(const Eigen::VectorXd &x, const Eigen::MatrixXd &cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(x);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

double BruteLlr(const Eigen::VectorXd &mu, const Eigen::MatrixXd &b, const Eigen::MatrixXd &w,
                const Eigen::VectorXd &x1, const Eigen::VectorXd &x2) {
  const Eigen::Index d = mu.size();
  Eigen::MatrixXd same(2 * d, 2 * d), diff = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  same << b + w, b, b, b + w;
  diff.topLeftCorner(d, d) = b + w;
  diff.bottomRightCorner(d, d) = b + w;
  Eigen::VectorXd joint(2 * d);
  joint << x1 - mu, x2 - mu;
  return LogGauss(joint, same) - LogGauss(joint, diff);
}

Eigen::MatrixXd RandomSpd(Eigen::Index d, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd RandomVec(Eigen::Index d, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

Outcome PldaOracle() {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const Eigen::Index d = 1 + draw % 3;
    const Eigen::VectorXd mu = RandomVec(d, rng);
    const Eigen::MatrixXd b = RandomSpd(d, rng), w = RandomSpd(d, rng);
    const Plda plda(mu, b, w);
    const Eigen::VectorXd x1 = RandomVec(d, rng, 2.0), x2 = RandomVec(d, rng, 2.0);
    worst = std::max(worst, std::abs(plda.Score(x1, x2) - BruteLlr(mu, b, w, x1, x2)));
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1), one = Eigen::VectorXd::Ones(1);
  const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(1, 1);
  const double example = Plda(zero, unit, unit).Score(one, one);
  const double expected = std::log(2.0) - 0.5 * std::log(3.0) + 1.0 / 6.0;
  Outcome o;
  o.pass = worst < 1e-8 && std::abs(example - expected) < 1e-12 && std::abs(example - 0.3105) < 5e-5;
  o.detail = "1000 draws over dims 1-3, worst |diff| " + Fmt("%.2e", worst) + "; 1-D example " + Fmt("%.6f", example);
  return o;
}

// ---------------------------------------------------------------------------
// 4. EER and minDCF against an exhaustive threshold sweep.

struct Sweep {
  std::vector<double> p_miss, p_fa;
};

// Thresholds below all scores, between every pair of adjacent distinct
// scores, and above all scores; counts by direct enumeration.
Sweep ThresholdSweep(const std::vector<double> &tar, const std::vector<double> &non) {
  std::set<double> distinct(tar.begin(), tar.end());
  distinct.insert(non.begin(), non.end());
  const std::vector<double> d(distinct.begin(), distinct.end());
  std::vector<double> thresholds = {d.front() - 1.0};
  for (std::size_t i = 0; i + 1 < d.size(); ++i) thresholds.push_back(0.5 * (d[i] + d[i + 1]));
  thresholds.push_back(d.back() + 1.0);
  Sweep s;
  for (double t : thresholds) {
    std::size_t miss = 0, fa = 0;
    for (double x : tar) miss += x < t;
    for (double x : non) fa += x >= t;
    s.p_miss.push_back(static_cast<double>(miss) / static_cast<double>(tar.size()));
    s.p_fa.push_back(static_cast<double>(fa) / static_cast<double>(non.size()));
  }
  return s;
}

double SweepEer(const Sweep &s) {
  for (std::size_t j = 0; j < s.p_miss.size(); ++j) {
    const double gap = s.p_miss[j] - s.p_fa[j];
    if (gap < 0.0) continue;
    if (gap == 0.0 || j == 0) return s.p_miss[j];
    const double m0 = s.p_miss[j - 1], f0 = s.p_fa[j - 1], m1 = s.p_miss[j], f1 = s.p_fa[j];
    const double alpha = (f0 - m0) / ((m1 - m0) - (f1 - f0));
    return m0 + alpha * (m1 - m0);
  }
  return s.p_miss.back();
}

double SweepMinDcf(const Sweep &s, double p) {
  double best = 1e300;
  for (std::size_t j = 0; j < s.p_miss.size(); ++j) best = std::min(best, p * s.p_miss[j] + (1.0 - p) * s.p_fa[j]);
  return best / std::min(p, 1.0 - p);
}

Outcome MetricOracle() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0, invariance_failures = 0;
  for (int set = 0; set < 1000; ++set) {
    std::uniform_int_distribution<int> size(1, 120), grid(-20, 20);
    std::normal_distribution<double> n(0.0, 1.0);
    const bool coarse = set % 2 == 0;
    std::vector<double> tar(static_cast<std::size_t>(size(rng))), non(static_cast<std::size_t>(size(rng)));
    for (double &x : tar) x = coarse ? grid(rng) / 4.0 + 1.0 : std::round((n(rng) + 1.0) * 1000.0) / 1000.0;
    for (double &x : non) x = coarse ? grid(rng) / 4.0 : std::round(n(rng) * 1000.0) / 1000.0;
    const Sweep sweep = ThresholdSweep(tar, non);
    const double eer = ComputeEer(tar, non), d1 = ComputeMinDcf(tar, non, 0.01), d2 = ComputeMinDcf(tar, non, 0.001);
    mismatches += eer != SweepEer(sweep) || d1 != SweepMinDcf(sweep, 0.01) || d2 != SweepMinDcf(sweep, 0.001);
    for (const std::function<double(double)> &f : std::vector<std::function<double(double)>>{
             [](double x) { return 3.0 * x - 7.0; }, [](double x) { return std::exp(x); },
             [](double x) { return x * x * x + x; }}) {
      std::vector<double> ft(tar), fn(non);
      std::transform(ft.begin(), ft.end(), ft.begin(), f);
      std::transform(fn.begin(), fn.end(), fn.begin(), f);
      invariance_failures += ComputeEer(ft, fn) != eer || ComputeMinDcf(ft, fn, 0.01) != d1 ||
                             ComputeMinDcf(ft, fn, 0.001) != d2;
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && invariance_failures == 0;
  o.detail = "1000 trial sets: " + std::to_string(mismatches) + " oracle mismatches, " +
             std::to_string(invariance_failures) + " monotone-transform differences";
  return o;
}

// ---------------------------------------------------------------------------
// 5. Two full pipeline runs produce identical bytes.

std::map<std::string, std::string> TreeBytes(const fs::path &root) {
  std::map<std::string, std::string> out;
  for (const auto &entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      out[fs::relative(entry.path(), root).generic_string()] = ReadFileBytes(entry.path().string());
  return out;
}

Outcome Determinism(const fs::path &work) {
  RunConfig config = LoadRunConfig(ConfigPath("smoke.toml"));
  config.train.epochs = 3;
  config.pipeline_systems = {"x-vector", "GTM", "GNCN-F0-FC", "GNCN-F1-FC"};
  config.out_dir = "run";
  CommandInputs in;
  in.command_line = "acceptance determinism";
  const fs::path cwd = fs::current_path();
  std::vector<std::map<std::string, std::string>> trees;
  for (const char *name : {"a", "b"}) {
    const fs::path dir = work / "determinism" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::current_path(dir);
    try {
      RunPipeline(config, in);
    } catch (...) {
      fs::current_path(cwd);
      throw;
    }
    fs::current_path(cwd);
    trees.push_back(TreeBytes(dir / "run"));
  }
  std::size_t differing = 0;
  std::set<std::string> kinds;
  for (const auto &[path, bytes] : trees[0]) {
    auto it = trees[1].find(path);
    if (it == trees[1].end() || it->second != bytes) ++differing;
    kinds.insert(fs::path(path).extension().string());
  }
  differing += trees[1].size() > trees[0].size() ? trees[1].size() - trees[0].size() : 0;
  const std::vector<std::string> required = {".xvck", ".xvem", ".txt", ".csv", ".xvbk"};
  bool covered = true;
  for (const std::string &k : required) covered = covered && kinds.count(k);
  Outcome o;
  o.pass = differing == 0 && covered && !trees[0].empty();
  o.detail = std::to_string(trees[0].size()) + " files compared (checkpoints, embeddings, backends, scores, reports, " +
             "run records), " + std::to_string(differing) + " differ";
  return o;
}

// ---------------------------------------------------------------------------
// 6. Desk-scale experiment over five seeds.

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome DeskScale(const fs::path &work) {
  const auto start = Clock::now();
  RunConfig config = LoadRunConfig(ConfigPath("desk.toml"));
  const std::vector<std::string> systems = {"x-vector", "GNCN-F0-FC", "GNCN-F1-FC"};
  config.pipeline_systems = systems;
  const fs::path root = work / "desk";
  fs::remove_all(root);
  CommandInputs in;
  in.command_line = "acceptance desk-scale";
  RunConfig data_config = config;
  data_config.out_dir = (root / "data").string();
  RunGenData(data_config, in);
  config.data_dir = data_config.out_dir;

  const double ce_limit = 0.5 * std::log(static_cast<double>(config.corpus.train_speakers));
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::map<std::string, std::vector<MetricsReport>> by_system;
  std::ostringstream per_seed;
  per_seed << "seed,system,eer,dcf_p01,dcf_p001,final_train_ce,aux_drop\n";
  bool ce_ok = true, aux_ok = true, eer_ok = true;
  std::string notes;
  for (std::uint64_t seed : seeds) {
    config.seed = seed;
    config.out_dir = (root / ("seed" + std::to_string(seed))).string();
    const CommandResult r = RunPipeline(config, in);
    std::map<std::string, const TrainLog *> logs;
    for (std::size_t i = 0; i < systems.size(); ++i) logs[systems[i]] = &r.logs[i];
    for (const MetricsReport &m : r.reports) {
      by_system[m.system].push_back(m);
      double final_ce = std::nan(""), drop = std::nan("");
      if (logs.count(m.system)) {
        const TrainLog &log = *logs[m.system];
        final_ce = log.epochs.back().train_ce;
        const double first = log.epochs.front().train_aux;
        if (first > 0.0) drop = (first - log.epochs.back().train_aux) / first;
      }
      char line[200];
      std::snprintf(line, sizeof(line), "%llu,%s,%.3f,%.4f,%.4f,%.6f,%.4f\n", static_cast<unsigned long long>(seed),
                    m.system.c_str(), 100.0 * m.eer, m.min_dcf_p01, m.min_dcf_p001, final_ce, drop);
      per_seed << line;
      const bool gated = m.system == "x-vector" || m.system == "GNCN-F1-FC";
      if (gated && !(final_ce < ce_limit)) {
        ce_ok = false;
        notes += "; seed " + std::to_string(seed) + " " + m.system + " CE " + Fmt("%.3f", final_ce);
      }
      if (gated && !(m.eer < 0.15)) {
        eer_ok = false;
        notes += "; seed " + std::to_string(seed) + " " + m.system + " EER " + Fmt("%.2f%%", 100.0 * m.eer);
      }
      if (m.system == "GNCN-F1-FC" && !(drop >= 0.30)) {
        aux_ok = false;
        notes += "; seed " + std::to_string(seed) + " aux drop " + Fmt("%.1f%%", 100.0 * drop);
      }
    }
  }

  std::vector<MetricsReport> table;
  for (const std::string &name : {"x-vector", "GNCN-F0-FC", "GNCN-F1-FC", "GNCN-Fusion"}) {
    MetricsReport m;
    m.system = name;
    std::vector<double> eer, d1, d2;
    for (const MetricsReport &r : by_system[name]) {
      eer.push_back(r.eer);
      d1.push_back(r.min_dcf_p01);
      d2.push_back(r.min_dcf_p001);
    }
    if (eer.size() != seeds.size()) return {false, "missing results for " + name};
    m.eer = Median(eer);
    m.min_dcf_p01 = Median(d1);
    m.min_dcf_p001 = Median(d2);
    table.push_back(m);
  }
  const std::string table_path = (work / "desk_results.csv").string();
  WriteFileBytes(table_path, ReportCsv(table));
  WriteFileBytes((work / "desk_results_per_seed.csv").string(), per_seed.str());
  const double elapsed = Seconds(start);

  Outcome o;
  o.pass = ce_ok && aux_ok && eer_ok && elapsed < 1800.0;
  o.detail = "5 seeds in " + Fmt("%.0f", elapsed) + " s; median EER x-vector " + Fmt("%.2f%%", 100.0 * table[0].eer) +
             ", GNCN-F1-FC " + Fmt("%.2f%%", 100.0 * table[2].eer) + ", GNCN-Fusion " +
             Fmt("%.2f%%", 100.0 * table[3].eer) + " (" + table_path + ")" + notes;
  if (!(elapsed < 1800.0)) o.detail += "; exceeded 30 minutes";
  return o;
}

// ---------------------------------------------------------------------------
// 7. A GNCN run with lambda = 0 follows the baseline trajectory exactly.

std::string PrimaryBytes(XvectorModel &model) {
  std::string out;
  for (diff::Tensor *t : model.PrimaryParameters())
    out.append(reinterpret_cast<const char *>(t->data()), t->size() * sizeof(double));
  return out;
}

Outcome LambdaZero() {
  RunConfig config = LoadRunConfig(ConfigPath("desk.toml"));
  SyntheticCorpusOptions corpus = config.corpus;
  corpus.train_speakers = 20;
  corpus.eval_speakers = 2;
  SyntheticCorpus c = GenerateSyntheticCorpus(corpus);
  const TrainData data = TrainData::FromSplits(std::move(c.train), std::move(c.validation));
  config.train.epochs = 3;
  std::size_t epochs_compared = 0, mismatched = 0;
  std::string variants;
  for (const char *name : {"GNCN-F1-FC", "GNCN-F0-FC", "GNCN-F1-BN", "GNCN-F0-IN"}) {
    TrainConfig base = config.ResolveTrain("x-vector");
    TrainConfig gncn = config.ResolveTrain(name);
    gncn.lambda_initial = 0.0;
    Trainer a(config.model, base, &data), b(config.model, gncn, &data);
    for (std::size_t e = 0; e < config.train.epochs; ++e) {
      a.RunEpoch();
      b.RunEpoch();
      ++epochs_compared;
      mismatched += PrimaryBytes(a.model()) != PrimaryBytes(b.model());
    }
    for (std::size_t i = 0; i < a.log().steps.size(); ++i) mismatched += a.log().steps[i].ce != b.log().steps[i].ce;
    variants += std::string(variants.empty() ? "" : ", ") + name;
  }
  Outcome o;
  o.pass = mismatched == 0 && epochs_compared > 0;
  o.detail = variants + ": " + std::to_string(epochs_compared) + " epoch snapshots, " + std::to_string(mismatched) +
             " mismatches";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Backend chain on embeddings from a two-covariance model.

double BackendEer(double between_scale, std::uint64_t seed) {
  const Eigen::Index dim = 20;
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd w = RandomSpd(dim, rng);
  w *= static_cast<double>(dim) / w.trace();
  Eigen::MatrixXd b = RandomSpd(dim, rng);
  b *= between_scale * static_cast<double>(dim) / b.trace();
  const Eigen::VectorXd mu = RandomVec(dim, rng, 3.0);
  Eigen::LLT<Eigen::MatrixXd> lw(w);
  const Eigen::MatrixXd chol_w = lw.matrixL();
  Eigen::MatrixXd chol_b = Eigen::MatrixXd::Zero(dim, dim);
  if (between_scale > 0.0) chol_b = Eigen::LLT<Eigen::MatrixXd>(b).matrixL();
  auto speaker = [&]() -> Eigen::VectorXd { return mu + chol_b * RandomVec(dim, rng); };
  auto utterance = [&](const Eigen::VectorXd &y) -> Eigen::VectorXd { return y + chol_w * RandomVec(dim, rng); };

  const int train_speakers = 200, train_utts = 10;
  EmbeddingMatrix train(train_speakers * train_utts, dim);
  std::vector<int> labels;
  for (int s = 0; s < train_speakers; ++s) {
    const Eigen::VectorXd y = speaker();
    for (int u = 0; u < train_utts; ++u) {
      train.row(s * train_utts + u) = utterance(y);
      labels.push_back(s);
    }
  }
  BackendConfig cfg;
  cfg.lda_dim = 15;
  const BackendModel backend = BackendModel::Fit(train, labels, cfg);

  EmbeddingSet enroll, test;
  const int eval_speakers = 200, tests_per_speaker = 5;
  std::vector<Eigen::VectorXd> e_rows, t_rows;
  for (int s = 0; s < eval_speakers; ++s) {
    const Eigen::VectorXd y = speaker();
    const std::string spk = "s" + std::to_string(s);
    enroll.utterance_ids.push_back(spk + "e");
    enroll.speaker_ids.push_back(spk);
    e_rows.push_back(utterance(y));
    for (int u = 0; u < tests_per_speaker; ++u) {
      test.utterance_ids.push_back(spk + "t" + std::to_string(u));
      test.speaker_ids.push_back(spk);
      t_rows.push_back(utterance(y));
    }
  }
  auto fill = [&](EmbeddingSet &set, const std::vector<Eigen::VectorXd> &rows) {
    set.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) set.vectors.row(static_cast<Eigen::Index>(i)) = rows[i];
  };
  fill(enroll, e_rows);
  fill(test, t_rows);
  TrialList trials;
  for (std::size_t i = 0; i < enroll.size(); ++i)
    for (std::size_t j = 0; j < test.size(); ++j)
      trials.trials.push_back({enroll.utterance_ids[i], test.utterance_ids[j], enroll.speaker_ids[i] == test.speaker_ids[j]});
  return EvaluateScores("backend", ScoreTrials(backend, enroll, test, trials), trials).eer;
}

Outcome BackendChain() {
  const bool warnings = true;
  SetWarningsEnabled(false);
  const double dominant = BackendEer(10.0, 5), none = BackendEer(0.0, 6);
  SetWarningsEnabled(warnings);
  Outcome o;
  o.pass = dominant < 0.02 && std::abs(none - 0.5) <= 0.05;
  o.detail = "EER " + Fmt("%.2f%%", 100.0 * dominant) + " at between:within 10:1, " + Fmt("%.2f%%", 100.0 * none) +
             " with no between-speaker variance";
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  TuneAllocator();
  fs::path work = "acceptance-out";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--only 1,2,...]\n";
      return 1;
    }
  }
  fs::create_directories(work);
  work = fs::absolute(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", GradientSuite},
      {"loss-formula fidelity", LossFormulas},
      {"PLDA oracle equivalence", PldaOracle},
      {"metric oracle equivalence", MetricOracle},
      {"pipeline determinism", [&] { return Determinism(work); }},
      {"desk-scale end to end", [&] { return DeskScale(work); }},
      {"lambda = 0 equivalence", LambdaZero},
      {"backend chain sanity", BackendChain},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
