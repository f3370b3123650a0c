// include/xvec/backend/backend.h

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

#ifndef XVEC_BACKEND_BACKEND_H_
#define XVEC_BACKEND_BACKEND_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xvec/base/binary-io.h"

namespace xvec {

// Embeddings are stored one per row.
using EmbeddingMatrix = Eigen::MatrixXd;

/// Arithmetic mean of the rows; DataError when there are none.
Eigen::VectorXd FitCenter(const EmbeddingMatrix &x);

struct Lda {
  Eigen::MatrixXd projection;    // [dim x out_dim]; y = projection^T x
  Eigen::VectorXd eigenvalues;   // decreasing, one per output dimension
};

/// Generalized eigenproblem Sb v = l (Sw + eps I) v with
/// eps = shrinkage * trace(Sw) / dim. Columns are (Sw + eps I)-orthonormal,
/// ordered by decreasing eigenvalue, and signed so that their
/// largest-magnitude entry is positive. `out_dim` is truncated to
/// min(dim, num_speakers - 1) with a warning.
Lda FitLda(const EmbeddingMatrix &x, std::span<const int> labels, std::size_t out_dim, double shrinkage = 1e-6);

/// Within- and between-class scatter (normalized by the number of rows).
void ClassScatter(const EmbeddingMatrix &x, std::span<const int> labels, Eigen::MatrixXd *within,
                  Eigen::MatrixXd *between);

enum class LengthNorm { kSqrtDim, kUnit, kNone };

/// e * r / ||e|| with r = sqrt(dim) (kSqrtDim) or 1 (kUnit). Throws
/// NumericError for a zero vector.
Eigen::VectorXd LengthNormalize(const Eigen::VectorXd &e, LengthNorm mode = LengthNorm::kSqrtDim);

/// Two-covariance PLDA: x = y_s + e, y_s ~ N(mu, B), e ~ N(0, W).
class Plda {
 public:
  Plda() = default;
  Plda(Eigen::VectorXd mu, Eigen::MatrixXd between, Eigen::MatrixXd within);

  /// log p(a, b | same speaker) - log p(a) p(b).
  double Score(const Eigen::VectorXd &enroll, const Eigen::VectorXd &test) const;

  /// Marginal log-likelihood of labelled data with the latent speaker
  /// variables integrated out.
  double LogLikelihood(const EmbeddingMatrix &x, std::span<const int> labels) const;

  std::size_t dim() const { return static_cast<std::size_t>(mu_.size()); }
  const Eigen::VectorXd &mu() const { return mu_; }
  const Eigen::MatrixXd &between() const { return between_; }
  const Eigen::MatrixXd &within() const { return within_; }

  void Write(BinaryWriter &out) const;
  static Plda Read(BinaryReader &in);

 private:
  void Prepare();

  Eigen::VectorXd mu_;
  Eigen::MatrixXd between_;
  Eigen::MatrixXd within_;
  // Simultaneous diagonalization: V^T W V = I, V^T B V = diag(psi).
  Eigen::MatrixXd transform_;
  Eigen::VectorXd psi_;
};

struct PldaFit {
  Plda plda;
  std::vector<double> log_likelihood;  // before the first and after every iteration
};

/// EM for the two-covariance model. Needs >= 2 speakers with >= 2 rows each;
/// throws DataError when the within-class scatter is degenerate.
PldaFit FitPlda(const EmbeddingMatrix &x, std::span<const int> labels, std::size_t iterations = 10);

struct BackendConfig {
  std::size_t lda_dim = 100;
  // Ridge added to the LDA within-class scatter, relative to its mean
  // variance. Values near 1 help when the embedding dimension approaches
  // the number of training utterances.
  double lda_shrinkage = 1e-6;
  std::size_t plda_iterations = 10;
  LengthNorm length_norm = LengthNorm::kSqrtDim;
};

/// center -> LDA -> length norm -> PLDA.
class BackendModel {
 public:
  static BackendModel Fit(const EmbeddingMatrix &x, std::span<const int> labels, const BackendConfig &config);

  /// Applies center, LDA and length normalization to one raw embedding.
  Eigen::VectorXd Transform(const Eigen::VectorXd &raw) const;
  EmbeddingMatrix TransformAll(const EmbeddingMatrix &raw) const;
  /// PLDA score of two raw embeddings.
  double Score(const Eigen::VectorXd &enroll_raw, const Eigen::VectorXd &test_raw) const;
  /// PLDA score of two already transformed embeddings.
  double ScoreTransformed(const Eigen::VectorXd &enroll, const Eigen::VectorXd &test) const;

  const BackendConfig &config() const { return config_; }
  const Eigen::VectorXd &center() const { return center_; }
  const Lda &lda() const { return lda_; }
  const Plda &plda() const { return plda_; }
  const std::vector<double> &em_log_likelihood() const { return em_log_likelihood_; }

  /// "XVBK" container.
  std::string Encode() const;
  static BackendModel Decode(const std::string &bytes, const std::string &source);
  void Save(const std::string &path) const;
  static BackendModel Load(const std::string &path);

 private:
  BackendConfig config_;
  Eigen::VectorXd center_;
  Lda lda_;
  Plda plda_;
  std::vector<double> em_log_likelihood_;
};

inline constexpr std::uint32_t kBackendVersion = 1;

void WriteMatrix(BinaryWriter &out, const Eigen::MatrixXd &m);
Eigen::MatrixXd ReadMatrix(BinaryReader &in);

}  // namespace xvec

#endif  // XVEC_BACKEND_BACKEND_H_
