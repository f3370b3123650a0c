// src/backend/backend.cc

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

#include "xvec/backend/backend.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "xvec/base/error.h"

namespace xvec {

namespace {

constexpr std::string_view kBackendMagic = "XVBK";

struct Groups {
  std::vector<std::vector<Eigen::Index>> rows;  // per class, in label order
};

Groups GroupByLabel(const EmbeddingMatrix &x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw DimensionError("backend: " + std::to_string(x.rows()) + " embeddings but " + std::to_string(labels.size()) +
                         " labels");
  std::map<int, std::vector<Eigen::Index>> by;
  for (std::size_t i = 0; i < labels.size(); ++i) by[labels[i]].push_back(static_cast<Eigen::Index>(i));
  Groups g;
  for (auto &[label, rows] : by) g.rows.push_back(std::move(rows));
  return g;
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd &m) { return 0.5 * (m + m.transpose()); }

double LogDet(const Eigen::MatrixXd &m, const char *what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError(std::string("plda: ") + what + " is not positive definite");
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(llt.matrixL()(i, i));
  return 2.0 * s;
}

}  // namespace

Eigen::VectorXd FitCenter(const EmbeddingMatrix &x) {
  if (x.rows() == 0) throw DataError("fit_center: empty embedding set");
  return x.colwise().mean().transpose();
}

void ClassScatter(const EmbeddingMatrix &x, std::span<const int> labels, Eigen::MatrixXd *within,
                  Eigen::MatrixXd *between) {
  Groups g = GroupByLabel(x, labels);
  const Eigen::Index d = x.cols();
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd global = x.colwise().mean().transpose();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d), sb = Eigen::MatrixXd::Zero(d, d);
  for (const auto &rows : g.rows) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r : rows) mean += x.row(r).transpose();
    mean /= static_cast<double>(rows.size());
    for (Eigen::Index r : rows) {
      Eigen::VectorXd c = x.row(r).transpose() - mean;
      sw.noalias() += c * c.transpose();
    }
    Eigen::VectorXd m = mean - global;
    sb.noalias() += static_cast<double>(rows.size()) * m * m.transpose();
  }
  if (within) *within = Symmetrize(sw / n);
  if (between) *between = Symmetrize(sb / n);
}

Lda FitLda(const EmbeddingMatrix &x, std::span<const int> labels, std::size_t out_dim, double shrinkage) {
  Groups g = GroupByLabel(x, labels);
  if (g.rows.size() < 2) throw DataError("lda: need at least 2 speakers, got " + std::to_string(g.rows.size()));
  const std::size_t d = static_cast<std::size_t>(x.cols());
  const std::size_t limit = std::min(d, g.rows.size() - 1);
  if (out_dim == 0) throw ConfigError("lda: output dimension must be positive");
  if (!(shrinkage > 0.0) || !std::isfinite(shrinkage)) throw ConfigError("lda: shrinkage must be positive and finite");
  if (out_dim > limit) {
    Warn("lda: output dimension " + std::to_string(out_dim) + " truncated to " + std::to_string(limit) +
         " (dim " + std::to_string(d) + ", " + std::to_string(g.rows.size()) + " speakers)");
    out_dim = limit;
  }
  Eigen::MatrixXd sw, sb;
  ClassScatter(x, labels, &sw, &sb);
  const double eps = shrinkage * sw.trace() / static_cast<double>(d);
  Eigen::MatrixXd swr = sw + eps * Eigen::MatrixXd::Identity(sw.rows(), sw.cols());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sb, swr);
  if (solver.info() != Eigen::Success) throw NumericError("lda: generalized eigensolver failed");
  Lda lda;
  lda.projection.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(out_dim));
  lda.eigenvalues.resize(static_cast<Eigen::Index>(out_dim));
  for (std::size_t k = 0; k < out_dim; ++k) {
    const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - k);  // eigenvalues ascend
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    v /= std::sqrt(v.dot(swr * v));
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v[big] < 0.0) v = -v;
    lda.projection.col(static_cast<Eigen::Index>(k)) = v;
    lda.eigenvalues[static_cast<Eigen::Index>(k)] = solver.eigenvalues()[src];
  }
  return lda;
}

Eigen::VectorXd LengthNormalize(const Eigen::VectorXd &e, LengthNorm mode) {
  if (mode == LengthNorm::kNone) return e;
  const double norm = e.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("length_normalize: zero or non-finite vector");
  const double radius = mode == LengthNorm::kSqrtDim ? std::sqrt(static_cast<double>(e.size())) : 1.0;
  return e * (radius / norm);
}

Plda::Plda(Eigen::VectorXd mu, Eigen::MatrixXd between, Eigen::MatrixXd within)
    : mu_(std::move(mu)), between_(Symmetrize(between)), within_(Symmetrize(within)) {
  const Eigen::Index d = mu_.size();
  if (between_.rows() != d || between_.cols() != d || within_.rows() != d || within_.cols() != d)
    throw DimensionError("plda: covariance shapes do not match mean of dim " + std::to_string(d));
  Prepare();
}

void Plda::Prepare() {
  Eigen::LLT<Eigen::MatrixXd> llt(within_);
  if (llt.info() != Eigen::Success) throw NumericError("plda: within-class covariance is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between_, within_);
  if (solver.info() != Eigen::Success) throw NumericError("plda: simultaneous diagonalization failed");
  transform_ = solver.eigenvectors();
  psi_ = solver.eigenvalues().cwiseMax(0.0);
}

double Plda::Score(const Eigen::VectorXd &enroll, const Eigen::VectorXd &test) const {
  if (enroll.size() != mu_.size() || test.size() != mu_.size())
    throw DimensionError("plda_score: embeddings of dim " + std::to_string(enroll.size()) + "/" +
                         std::to_string(test.size()) + " against model dim " + std::to_string(mu_.size()));
  const Eigen::VectorXd a = transform_.transpose() * (enroll - mu_);
  const Eigen::VectorXd b = transform_.transpose() * (test - mu_);
  double llr = 0.0;
  for (Eigen::Index k = 0; k < psi_.size(); ++k) {
    const double p = psi_[k], aa = a[k] * a[k] + b[k] * b[k], ab = a[k] * b[k];
    llr += -0.5 * std::log(2.0 * p + 1.0) + std::log(p + 1.0) -
           0.5 * (((p + 1.0) * aa - 2.0 * p * ab) / (2.0 * p + 1.0) - aa / (p + 1.0));
  }
  return llr;
}

double Plda::LogLikelihood(const EmbeddingMatrix &x, std::span<const int> labels) const {
  Groups g = GroupByLabel(x, labels);
  const Eigen::Index d = mu_.size();
  if (x.cols() != d) throw DimensionError("plda: data dimension does not match model");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double logdet_w = LogDet(within_, "within-class covariance");
  Eigen::LLT<Eigen::MatrixXd> wllt(within_);
  double total = 0.0;
  for (const auto &rows : g.rows) {
    const double n = static_cast<double>(rows.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r : rows) mean += x.row(r).transpose();
    mean /= n;
    // Mean term: xbar ~ N(mu, B + W/n).
    Eigen::MatrixXd s = between_ + within_ / n;
    Eigen::LLT<Eigen::MatrixXd> sllt(s);
    if (sllt.info() != Eigen::Success) throw NumericError("plda: marginal covariance is not positive definite");
    const Eigen::VectorXd dm = mean - mu_;
    total += -0.5 * (static_cast<double>(d) * log2pi + LogDet(s, "marginal covariance") + dm.dot(sllt.solve(dm)));
    // Deviations from the speaker mean.
    double quad = 0.0;
    for (Eigen::Index r : rows) {
      const Eigen::VectorXd c = x.row(r).transpose() - mean;
      quad += c.dot(wllt.solve(c));
    }
    total += -0.5 * (n - 1.0) * (static_cast<double>(d) * log2pi + logdet_w) -
             0.5 * static_cast<double>(d) * std::log(n) - 0.5 * quad;
  }
  return total;
}

void Plda::Write(BinaryWriter &out) const {
  WriteMatrix(out, mu_);
  WriteMatrix(out, between_);
  WriteMatrix(out, within_);
}

Plda Plda::Read(BinaryReader &in) {
  Eigen::MatrixXd mu = ReadMatrix(in);
  Eigen::MatrixXd b = ReadMatrix(in);
  Eigen::MatrixXd w = ReadMatrix(in);
  if (mu.cols() != 1) throw FormatError(in.source() + ": plda mean is not a column vector");
  return Plda(mu.col(0), b, w);
}

PldaFit FitPlda(const EmbeddingMatrix &x, std::span<const int> labels, std::size_t iterations) {
  Groups g = GroupByLabel(x, labels);
  if (g.rows.size() < 2) throw DataError("plda: need at least 2 speakers, got " + std::to_string(g.rows.size()));
  for (const auto &rows : g.rows)
    if (rows.size() < 2) throw DataError("plda: every speaker needs at least 2 embeddings");
  const Eigen::Index d = x.cols();
  const double n_total = static_cast<double>(x.rows());
  const double num_spk = static_cast<double>(g.rows.size());

  std::vector<Eigen::VectorXd> means;
  for (const auto &rows : g.rows) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r : rows) m += x.row(r).transpose();
    means.push_back(m / static_cast<double>(rows.size()));
  }
  // Initialization from class scatter.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (const auto &m : means) mu += m;
  mu /= num_spk;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d), b = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < g.rows.size(); ++s) {
    for (Eigen::Index r : g.rows[s]) {
      Eigen::VectorXd c = x.row(r).transpose() - means[s];
      w.noalias() += c * c.transpose();
    }
    Eigen::VectorXd c = means[s] - mu;
    b.noalias() += c * c.transpose();
  }
  w /= n_total;
  b /= num_spk;
  const double w_trace = w.trace();
  if (!(w_trace > 1e-12 * std::max(1.0, b.trace())))
    throw DataError("plda: within-class scatter is degenerate (rank 0)");
  if (Eigen::LLT<Eigen::MatrixXd>(w).info() != Eigen::Success)
    throw DataError("plda: within-class scatter is singular");

  PldaFit fit;
  fit.plda = Plda(mu, b, w);
  fit.log_likelihood.push_back(fit.plda.LogLikelihood(x, labels));
  for (std::size_t it = 0; it < iterations; ++it) {
    Eigen::VectorXd mu_acc = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd b_acc = Eigen::MatrixXd::Zero(d, d), w_acc = Eigen::MatrixXd::Zero(d, d);
    std::vector<Eigen::VectorXd> post_means;
    std::vector<Eigen::MatrixXd> post_covs;
    for (std::size_t s = 0; s < g.rows.size(); ++s) {
      const double n = static_cast<double>(g.rows[s].size());
      // Posterior of y_s; written so that a singular B is fine.
      Eigen::MatrixXd sm = b + w / n;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(sm);
      Eigen::MatrixXd gain = ldlt.solve(b).transpose();  // B (B + W/n)^-1
      Eigen::VectorXd m = mu + gain * (means[s] - mu);
      Eigen::MatrixXd c = Symmetrize(b - gain * b);
      for (Eigen::Index r : g.rows[s]) {
        Eigen::VectorXd e = x.row(r).transpose() - m;
        w_acc.noalias() += e * e.transpose();
      }
      w_acc += n * c;
      mu_acc += m;
      post_means.push_back(std::move(m));
      post_covs.push_back(std::move(c));
    }
    mu = mu_acc / num_spk;
    for (std::size_t s = 0; s < post_means.size(); ++s) {
      Eigen::VectorXd c = post_means[s] - mu;
      b_acc.noalias() += post_covs[s] + c * c.transpose();
    }
    b = Symmetrize(b_acc / num_spk);
    w = Symmetrize(w_acc / n_total);
    fit.plda = Plda(mu, b, w);
    fit.log_likelihood.push_back(fit.plda.LogLikelihood(x, labels));
  }
  return fit;
}

BackendModel BackendModel::Fit(const EmbeddingMatrix &x, std::span<const int> labels, const BackendConfig &config) {
  if (config.plda_iterations == 0) throw ConfigError("backend: plda_iterations must be positive");
  BackendModel m;
  m.config_ = config;
  m.center_ = FitCenter(x);
  EmbeddingMatrix centered = x.rowwise() - m.center_.transpose();
  m.lda_ = FitLda(centered, labels, config.lda_dim, config.lda_shrinkage);
  m.config_.lda_dim = static_cast<std::size_t>(m.lda_.projection.cols());
  EmbeddingMatrix projected = centered * m.lda_.projection;
  for (Eigen::Index i = 0; i < projected.rows(); ++i)
    projected.row(i) = LengthNormalize(projected.row(i).transpose(), config.length_norm).transpose();
  PldaFit fit = FitPlda(projected, labels, config.plda_iterations);
  m.plda_ = std::move(fit.plda);
  m.em_log_likelihood_ = std::move(fit.log_likelihood);
  return m;
}

Eigen::VectorXd BackendModel::Transform(const Eigen::VectorXd &raw) const {
  if (raw.size() != center_.size())
    throw DimensionError("backend: embedding of dim " + std::to_string(raw.size()) + ", expected " +
                         std::to_string(center_.size()));
  return LengthNormalize(lda_.projection.transpose() * (raw - center_), config_.length_norm);
}

EmbeddingMatrix BackendModel::TransformAll(const EmbeddingMatrix &raw) const {
  EmbeddingMatrix out(raw.rows(), lda_.projection.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) out.row(i) = Transform(raw.row(i).transpose()).transpose();
  return out;
}

double BackendModel::Score(const Eigen::VectorXd &enroll_raw, const Eigen::VectorXd &test_raw) const {
  return plda_.Score(Transform(enroll_raw), Transform(test_raw));
}

double BackendModel::ScoreTransformed(const Eigen::VectorXd &enroll, const Eigen::VectorXd &test) const {
  return plda_.Score(enroll, test);
}

std::string BackendModel::Encode() const {
  BinaryWriter w;
  w.WriteBytes(kBackendMagic);
  w.WriteU32(kBackendVersion);
  w.WriteU64(config_.lda_dim);
  w.WriteU64(config_.plda_iterations);
  w.WriteU32(static_cast<std::uint32_t>(config_.length_norm));
  WriteMatrix(w, center_);
  WriteMatrix(w, lda_.projection);
  WriteMatrix(w, lda_.eigenvalues);
  plda_.Write(w);
  w.WriteF64Vector(em_log_likelihood_);
  return w.buffer();
}

BackendModel BackendModel::Decode(const std::string &bytes, const std::string &source) {
  BinaryReader in(bytes, source);
  in.ExpectMagic(kBackendMagic);
  const std::uint32_t version = in.ReadU32();
  if (version != kBackendVersion) throw FormatError(source + ": unsupported backend version " + std::to_string(version));
  BackendModel m;
  m.config_.lda_dim = in.ReadU64();
  m.config_.plda_iterations = in.ReadU64();
  const std::uint32_t norm = in.ReadU32();
  if (norm > static_cast<std::uint32_t>(LengthNorm::kNone))
    throw FormatError(source + ": unknown length-norm mode " + std::to_string(norm));
  m.config_.length_norm = static_cast<LengthNorm>(norm);
  m.center_ = ReadMatrix(in).col(0);
  m.lda_.projection = ReadMatrix(in);
  m.lda_.eigenvalues = ReadMatrix(in).col(0);
  m.plda_ = Plda::Read(in);
  m.em_log_likelihood_ = in.ReadF64Vector();
  if (!in.AtEnd()) throw FormatError(source + ": trailing bytes in backend file");
  if (m.lda_.projection.rows() != m.center_.size() ||
      static_cast<std::size_t>(m.lda_.projection.cols()) != m.plda_.dim())
    throw FormatError(source + ": inconsistent backend dimensions");
  return m;
}

void BackendModel::Save(const std::string &path) const { WriteFileBytes(path, Encode()); }

BackendModel BackendModel::Load(const std::string &path) { return Decode(ReadFileBytes(path), path); }

void WriteMatrix(BinaryWriter &out, const Eigen::MatrixXd &m) {
  out.WriteU64(static_cast<std::uint64_t>(m.rows()));
  out.WriteU64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.WriteF64(m(i, j));
}

Eigen::MatrixXd ReadMatrix(BinaryReader &in) {
  const std::uint64_t rows = in.ReadU64(), cols = in.ReadU64();
  if (rows > 0 && cols > in.remaining() / 8 / std::max<std::uint64_t>(rows, 1))
    throw FormatError(in.source() + ": matrix of " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " at offset " + std::to_string(in.offset()) + " exceeds the " +
                      std::to_string(in.remaining()) + " available bytes");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in.ReadF64();
  return m;
}

}  // namespace xvec
