// tests/unit/backend-test.cc

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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "xvec/backend/backend.h"
#include "xvec/base/error.h"

using namespace xvec;

namespace {

Eigen::MatrixXd RandomSpd(Eigen::Index d, std::mt19937_64 &rng, double ridge) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() + ridge * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd RandomVector(Eigen::Index d, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

double LogGauss(const Eigen::VectorXd &x, const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd r = x - mean;
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + logdet + r.dot(llt.solve(r)));
}

// Same-speaker versus different-speaker likelihoods from explicitly
// assembled covariances.
double BruteLlr(const Eigen::VectorXd &mu, const Eigen::MatrixXd &b, const Eigen::MatrixXd &w,
                const Eigen::VectorXd &x1, const Eigen::VectorXd &x2) {
  const Eigen::Index d = mu.size();
  Eigen::MatrixXd joint(2 * d, 2 * d);
  joint << b + w, b, b, b + w;
  Eigen::VectorXd stacked(2 * d), mean2(2 * d);
  stacked << x1, x2;
  mean2 << mu, mu;
  return LogGauss(stacked, mean2, joint) - LogGauss(x1, mu, b + w) - LogGauss(x2, mu, b + w);
}

// Draws `speakers` x `utts` rows from the two-covariance model.
EmbeddingMatrix DrawTwoCov(const Eigen::VectorXd &mu, const Eigen::MatrixXd &b, const Eigen::MatrixXd &w,
                           int speakers, int utts, std::mt19937_64 &rng, std::vector<int> *labels,
                           EmbeddingMatrix *latents = nullptr) {
  const Eigen::Index d = mu.size();
  Eigen::MatrixXd lb = Eigen::MatrixXd::Zero(d, d), lw = w.llt().matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(b);
  lb = eb.eigenvectors() * eb.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  EmbeddingMatrix x(speakers * utts, d);
  labels->clear();
  if (latents) latents->resize(speakers, d);
  for (int s = 0; s < speakers; ++s) {
    Eigen::VectorXd y = mu + lb * RandomVector(d, rng);
    if (latents) latents->row(s) = y.transpose();
    for (int u = 0; u < utts; ++u) {
      x.row(s * utts + u) = (y + lw * RandomVector(d, rng)).transpose();
      labels->push_back(s);
    }
  }
  return x;
}

}  // namespace

TEST_CASE("fit_center") {
  EmbeddingMatrix x(2, 2);
  x << 1, 1, 3, 3;
  CHECK(FitCenter(x) == Eigen::Vector2d(2, 2));
  EmbeddingMatrix one(1, 3);
  one << 4, -1, 7;
  CHECK(FitCenter(one) == one.row(0).transpose());
  std::mt19937_64 rng(1);
  EmbeddingMatrix r(50, 6);
  for (Eigen::Index i = 0; i < 50; ++i) r.row(i) = RandomVector(6, rng, 3.0).transpose();
  EmbeddingMatrix c = r.rowwise() - FitCenter(r).transpose();
  CHECK(c.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(FitCenter(EmbeddingMatrix(0, 3)), DataError);
}

TEST_CASE("lda") {
  SUBCASE("classes separated along axis 1") {
    // Mirrored noise gives exactly zero cross-scatter, so the oracle
    // direction is exactly the first axis.
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<int> labels;
    std::vector<Eigen::Vector2d> rows;
    for (int c = 0; c < 5; ++c)
      for (int k = 0; k < 40; ++k) {
        const double dx = n(rng), dy = n(rng);
        for (double sx : {1.0, -1.0})
          for (double sy : {1.0, -1.0}) {
            rows.emplace_back(4.0 * c + sx * dx, sy * dy);
            labels.push_back(c);
          }
      }
    EmbeddingMatrix x(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    Lda lda = FitLda(x, labels, 1);
    Eigen::Vector2d v = lda.projection.col(0).normalized();
    CHECK(std::acos(std::min(1.0, std::abs(v[0]))) < 1e-3);
    CHECK(v[0] > 0.0);
  }
  SUBCASE("random data: truncation, ordering, metric, translation") {
    std::mt19937_64 rng(5);
    std::vector<int> labels;
    EmbeddingMatrix x(60, 8);
    std::vector<Eigen::VectorXd> means;
    for (int s = 0; s < 6; ++s) means.push_back(RandomVector(8, rng, 2.0));
    for (int i = 0; i < 60; ++i) {
      x.row(i) = (means[i % 6] + RandomVector(8, rng)).transpose();
      labels.push_back(i % 6);
    }
    SetWarningsEnabled(false);
    Lda lda = FitLda(x, labels, 100);
    SetWarningsEnabled(true);
    REQUIRE(lda.projection.cols() == 5);
    Eigen::MatrixXd sw, sb;
    ClassScatter(x, labels, &sw, &sb);
    const double eps = 1e-6 * sw.trace() / 8.0;
    Eigen::MatrixXd swr = sw + eps * Eigen::MatrixXd::Identity(8, 8);
    Eigen::MatrixXd gram = lda.projection.transpose() * swr * lda.projection;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-9);
    // Recompute the class-separation ratio on the projected training data.
    EmbeddingMatrix y = x * lda.projection;
    Eigen::MatrixXd ysw, ysb;
    ClassScatter(y, labels, &ysw, &ysb);
    double prev = 1e300;
    for (Eigen::Index k = 0; k < 5; ++k) {
      const double ratio = ysb(k, k) / ysw(k, k);
      CHECK(ratio <= prev * (1.0 + 1e-9));
      prev = ratio;
    }
    for (Eigen::Index k = 0; k < 5; ++k) {
      Eigen::Index big;
      lda.projection.col(k).cwiseAbs().maxCoeff(&big);
      CHECK(lda.projection(big, k) > 0.0);
    }
    EmbeddingMatrix shifted = x.rowwise() + RandomVector(8, rng, 10.0).transpose();
    Lda lda2 = FitLda(shifted, labels, 5);
    CHECK((lda2.projection - lda.projection).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("shrinkage on a singular within-class scatter") {
    // 12 dims, 4 speakers x 3 rows: Sw has rank 8.
    std::mt19937_64 rng(11);
    std::vector<int> labels;
    EmbeddingMatrix x(12, 12);
    for (int i = 0; i < 12; ++i) {
      x.row(i) = RandomVector(12, rng).transpose();
      labels.push_back(i % 4);
    }
    Lda lda = FitLda(x, labels, 3, 0.5);
    Eigen::MatrixXd sw, sb;
    ClassScatter(x, labels, &sw, &sb);
    Eigen::MatrixXd swr = sw + 0.5 * sw.trace() / 12.0 * Eigen::MatrixXd::Identity(12, 12);
    Eigen::MatrixXd gram = lda.projection.transpose() * swr * lda.projection;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::MatrixXd lhs = sb * lda.projection;
    Eigen::MatrixXd rhs = swr * lda.projection * lda.eigenvalues.asDiagonal();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9 * sb.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(FitLda(x, labels, 3, 0.0), ConfigError);
  }
  SUBCASE("needs two speakers") {
    EmbeddingMatrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    std::vector<int> labels = {0, 0, 0};
    CHECK_THROWS_AS(FitLda(x, labels, 1), DataError);
  }
}

TEST_CASE("length_normalize") {
  Eigen::VectorXd v = LengthNormalize(Eigen::Vector2d(3, 4));
  CHECK(v[0] == doctest::Approx(3.0 * std::sqrt(2.0) / 5.0).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(4.0 * std::sqrt(2.0) / 5.0).epsilon(1e-15));
  CHECK(v.norm() == doctest::Approx(std::sqrt(2.0)));
  Eigen::VectorXd fixed = Eigen::Vector2d(1.0, 1.0);
  CHECK((LengthNormalize(fixed) - fixed).cwiseAbs().maxCoeff() < 1e-15);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd r = RandomVector(7, rng, 5.0);
    CHECK(LengthNormalize(r).norm() == doctest::Approx(std::sqrt(7.0)));
    CHECK(LengthNormalize(r, LengthNorm::kUnit).norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(LengthNormalize(Eigen::Vector3d::Zero()), NumericError);
}

TEST_CASE("plda scoring") {
  SUBCASE("1-D worked example") {
    Plda p(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
    const double expected = std::log(2.0) - 0.5 * std::log(3.0) + 1.0 / 6.0;
    CHECK(p.Score(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.3105).epsilon(1e-4));
  }
  SUBCASE("B = 0 gives zero for every pair") {
    std::mt19937_64 rng(3);
    Plda p(RandomVector(3, rng), Eigen::MatrixXd::Zero(3, 3), RandomSpd(3, rng, 0.5));
    for (int i = 0; i < 20; ++i) CHECK(std::abs(p.Score(RandomVector(3, rng), RandomVector(3, rng))) < 1e-12);
  }
  SUBCASE("brute-force oracle, dims 1-3") {
    std::mt19937_64 rng(7);
    double worst = 0.0, worst_sym = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
      const Eigen::Index d = 1 + draw % 3;
      Eigen::VectorXd mu = RandomVector(d, rng);
      Eigen::MatrixXd b = RandomSpd(d, rng, 0.05), w = RandomSpd(d, rng, 0.2);
      Plda p(mu, b, w);
      Eigen::VectorXd x1 = mu + RandomVector(d, rng, 1.5), x2 = mu + RandomVector(d, rng, 1.5);
      worst = std::max(worst, std::abs(p.Score(x1, x2) - BruteLlr(mu, b, w, x1, x2)));
      worst_sym = std::max(worst_sym, std::abs(p.Score(x1, x2) - p.Score(x2, x1)));
    }
    CHECK(worst < 1e-8);
    CHECK(worst_sym < 1e-12);
  }
  SUBCASE("dimension mismatch") {
    Plda p(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(p.Score(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)), DimensionError);
  }
}

TEST_CASE("plda marginal likelihood matches the assembled joint Gaussian") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    Eigen::VectorXd mu = RandomVector(d, rng);
    Eigen::MatrixXd b = RandomSpd(d, rng, 0.1), w = RandomSpd(d, rng, 0.3);
    Plda p(mu, b, w);
    std::vector<int> labels;
    EmbeddingMatrix x = DrawTwoCov(mu, b, w, 3, 2 + trial % 3, rng, &labels);
    double brute = 0.0;
    for (int s = 0; s < 3; ++s) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        if (labels[static_cast<std::size_t>(r)] == s) rows.push_back(r);
      const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd cov(n * d, n * d);
      Eigen::VectorXd stacked(n * d), mean(n * d);
      for (Eigen::Index i = 0; i < n; ++i) {
        stacked.segment(i * d, d) = x.row(rows[static_cast<std::size_t>(i)]).transpose();
        mean.segment(i * d, d) = mu;
        for (Eigen::Index j = 0; j < n; ++j) cov.block(i * d, j * d, d, d) = i == j ? Eigen::MatrixXd(b + w) : b;
      }
      brute += LogGauss(stacked, mean, cov);
    }
    CHECK(p.LogLikelihood(x, labels) == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("plda EM") {
  SUBCASE("recovers a known model and increases the likelihood") {
    std::mt19937_64 rng(21);
    Eigen::Vector3d mu(1.0, -2.0, 0.5);
    Eigen::MatrixXd b = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);
    std::vector<int> labels;
    EmbeddingMatrix latents;
    EmbeddingMatrix x = DrawTwoCov(mu, b, w, 200, 10, rng, &labels, &latents);
    PldaFit fit = FitPlda(x, labels, 10);
    // 200 speaker draws leave ~10% sampling error on each diagonal of B, so
    // B is compared with the covariance the drawn speaker variables realize.
    EmbeddingMatrix yc = latents.rowwise() - latents.colwise().mean();
    Eigen::MatrixXd realized = yc.transpose() * yc / 200.0;
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(std::abs(fit.plda.between()(i, i) / realized(i, i) - 1.0) < 0.15);
      CHECK(std::abs(fit.plda.within()(i, i) - 1.0) < 0.15);
    }
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
      CHECK(fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-8);
    CHECK(fit.log_likelihood.size() == 11);
    CHECK((fit.plda.between() - fit.plda.between().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("no speaker effect drives B toward zero") {
    std::mt19937_64 rng(22);
    Eigen::MatrixXd w = RandomSpd(3, rng, 0.5);
    std::vector<int> labels;
    EmbeddingMatrix x = DrawTwoCov(Eigen::Vector3d::Zero(), Eigen::MatrixXd::Zero(3, 3), w, 200, 10, rng, &labels);
    PldaFit fit = FitPlda(x, labels, 10);
    const double bnorm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(fit.plda.between()).eigenvalues().cwiseAbs().maxCoeff();
    const double wnorm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(fit.plda.within()).eigenvalues().maxCoeff();
    CHECK(bnorm < 0.05 * wnorm);
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
      CHECK(fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-8);
  }
  SUBCASE("degenerate input") {
    EmbeddingMatrix x(4, 2);
    x << 1, 1, 1, 1, 2, 2, 2, 2;
    std::vector<int> labels = {0, 0, 1, 1};
    CHECK_THROWS_AS(FitPlda(x, labels), DataError);
    std::vector<int> single = {0, 0, 0, 1};
    CHECK_THROWS_AS(FitPlda(x, single), DataError);
  }
}

TEST_CASE("backend model round trip and purity") {
  std::mt19937_64 rng(31);
  std::vector<int> labels;
  Eigen::MatrixXd b = RandomSpd(6, rng, 0.5), w = RandomSpd(6, rng, 0.5);
  EmbeddingMatrix x = DrawTwoCov(RandomVector(6, rng), b, w, 20, 6, rng, &labels);
  BackendConfig cfg;
  cfg.lda_dim = 4;
  BackendModel m = BackendModel::Fit(x, labels, cfg);
  BackendModel back = BackendModel::Decode(m.Encode(), "mem");
  CHECK(back.Encode() == m.Encode());
  Eigen::VectorXd e = x.row(0).transpose(), t = x.row(7).transpose();
  CHECK(back.Score(e, t) == m.Score(e, t));
  CHECK(m.Score(e, t) == m.Score(e, t));
  CHECK(m.Transform(e).norm() == doctest::Approx(2.0));
  std::string bytes = m.Encode();
  bytes[1] = 'Q';
  CHECK_THROWS_AS(BackendModel::Decode(bytes, "bad"), FormatError);
  CHECK_THROWS_AS(BackendModel::Decode(m.Encode().substr(0, 40), "short"), FormatError);
}
