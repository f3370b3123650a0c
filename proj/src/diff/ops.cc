// src/diff/ops.cc

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

#include "xvec/diff/ops.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "xvec/base/error.h"

namespace xvec {
namespace diff {

namespace {

void Require(bool ok, const std::string &msg) {
  if (!ok) throw DimensionError(msg);
}

std::string Describe(const char *op, const Var &a, const Var &b) {
  std::ostringstream s;
  s << op << ": shapes " << ShapeString(a.shape()) << " and " << ShapeString(b.shape())
    << " do not conform";
  return s.str();
}

Graph &GraphOf(const Var &v) {
  if (!v.valid()) throw Error("op applied to an unbound Var");
  return *v.graph();
}

void RequireSameGraph(const Var &a, const Var &b) {
  if (a.graph() != b.graph()) throw Error("op inputs live on different graphs");
}

MatrixMap GradMatrix(Graph &g, Var v) {
  const Tensor &t = g.Value(v);
  auto cm = t.AsMatrix();
  return MatrixMap(g.Grad(v).data(), cm.rows(), cm.cols());
}

ConstMatrixMap SpanMatrix(std::span<const double> s, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatrixMap(s.data(), rows, cols);
}

// y = x w evaluated in blocks of exactly kRowBlock rows (the last one zero
// padded). Eigen picks its kernel and accumulation order from the operand
// sizes, so fixing the block shape makes every output row independent of
// how many other rows share the product.
constexpr Eigen::Index kRowBlock = 64;

template <typename X, typename W>
void RowBlockedProduct(const X &x, const W &w, MatrixMap y) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index full = rows / kRowBlock * kRowBlock;
  for (Eigen::Index r = 0; r < full; r += kRowBlock)
    y.middleRows(r, kRowBlock).noalias() = x.middleRows(r, kRowBlock) * w;
  if (full == rows) return;
  RowMatrix pad = RowMatrix::Zero(kRowBlock, x.cols());
  pad.topRows(rows - full) = x.bottomRows(rows - full);
  RowMatrix out(kRowBlock, w.cols());
  out.noalias() = pad * w;
  y.bottomRows(rows - full) = out.topRows(rows - full);
}

}  // namespace

BatchNorm::BatchNorm(std::size_t dim, double momentum_in, double epsilon_in)
    : gamma(Shape{dim}, 1.0),
      beta(Shape{dim}, 0.0),
      running_mean(dim, 0.0),
      running_var(dim, 1.0),
      momentum(momentum_in),
      epsilon(epsilon_in) {
  if (!(momentum > 0.0 && momentum < 1.0))
    throw ConfigError("batchnorm momentum must lie in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("batchnorm epsilon must be positive");
}

Var Affine(Var x, Var w, std::optional<Var> b) {
  Graph &g = GraphOf(x);
  RequireSameGraph(x, w);
  const Tensor &xt = x.value();
  const Tensor &wt = w.value();
  Require(xt.rank() >= 1 && wt.rank() == 2 && xt.shape().back() == wt.dim(0),
          Describe("affine", x, w));
  if (b) {
    RequireSameGraph(x, *b);
    Require(b->value().rank() == 1 && b->value().dim(0) == wt.dim(1), Describe("affine bias", w, *b));
  }
  Shape out_shape = xt.shape();
  out_shape.back() = wt.dim(1);
  Tensor y(out_shape);
  auto ym = y.AsMatrix();
  RowBlockedProduct(xt.AsMatrix(), wt.AsMatrix(), ym);
  if (b) ym.rowwise() += b->value().AsMatrix().row(0);

  std::vector<Var> inputs{x, w};
  if (b) inputs.push_back(*b);
  return g.Record("affine", std::move(y), inputs,
                  [x, w, b](Graph &g, std::span<const double> dy) {
                    auto xm = g.Value(x).AsMatrix();
                    auto wm = g.Value(w).AsMatrix();
                    auto dym = SpanMatrix(dy, xm.rows(), wm.cols());
                    if (g.RequiresGrad(x)) GradMatrix(g, x).noalias() += dym * wm.transpose();
                    if (g.RequiresGrad(w)) GradMatrix(g, w).noalias() += xm.transpose() * dym;
                    if (b && g.RequiresGrad(*b)) GradMatrix(g, *b).row(0) += dym.colwise().sum();
                  });
}

Var DilatedConv1d(Var x, Var kernel, Var bias, std::size_t dilation) {
  Graph &g = GraphOf(x);
  RequireSameGraph(x, kernel);
  RequireSameGraph(x, bias);
  const Tensor &xt = x.value();
  const Tensor &kt = kernel.value();
  Require(xt.rank() == 2 || xt.rank() == 3, "dilated_conv1d: input must be [T x D] or [N x T x D], got " +
                                                ShapeString(xt.shape()));
  Require(kt.rank() == 3, "dilated_conv1d: kernel must be [k x Din x Dout], got " + ShapeString(kt.shape()));
  Require(dilation >= 1, "dilated_conv1d: dilation must be positive");
  const bool batched = xt.rank() == 3;
  const std::size_t n = batched ? xt.dim(0) : 1;
  const std::size_t t_in = xt.dim(batched ? 1 : 0);
  const std::size_t d_in = xt.shape().back();
  const std::size_t k = kt.dim(0), d_out = kt.dim(2);
  Require(kt.dim(1) == d_in, Describe("dilated_conv1d", x, kernel));
  Require(bias.value().rank() == 1 && bias.value().dim(0) == d_out, Describe("dilated_conv1d bias", kernel, bias));
  const std::size_t span = (k - 1) * dilation + 1;
  if (t_in < span) {
    std::ostringstream msg;
    msg << "dilated_conv1d: input length " << t_in << " shorter than receptive field " << span
        << " (kernel " << k << ", dilation " << dilation << ")";
    throw InputLengthError(msg.str());
  }
  const std::size_t t_out = t_in - (k - 1) * dilation;

  // Unfold each output frame's receptive field into one row so the whole
  // batch is a single GEMM against the [k*Din x Dout] kernel view.
  RowMatrix cols(static_cast<Eigen::Index>(n * t_out), static_cast<Eigen::Index>(k * d_in));
  const double *xv = xt.data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t t = 0; t < t_out; ++t) {
      double *row = cols.data() + (b * t_out + t) * k * d_in;
      for (std::size_t j = 0; j < k; ++j)
        std::copy_n(xv + (b * t_in + t + j * dilation) * d_in, d_in, row + j * d_in);
    }
  ConstMatrixMap kmat(kt.data(), static_cast<Eigen::Index>(k * d_in), static_cast<Eigen::Index>(d_out));

  Shape out_shape = batched ? Shape{n, t_out, d_out} : Shape{t_out, d_out};
  Tensor y(out_shape);
  auto ym = y.AsMatrix();
  RowBlockedProduct(cols, kmat, ym);
  ym.rowwise() += bias.value().AsMatrix().row(0);

  std::vector<Var> inputs{x, kernel, bias};
  return g.Record(
      "dilated_conv1d", std::move(y), inputs,
      [x, kernel, bias, cols = std::move(cols), n, t_in, t_out, d_in, d_out, k, dilation](
          Graph &g, std::span<const double> dy) {
        auto dym = SpanMatrix(dy, static_cast<Eigen::Index>(n * t_out), static_cast<Eigen::Index>(d_out));
        const Tensor &kt = g.Value(kernel);
        ConstMatrixMap kmat(kt.data(), static_cast<Eigen::Index>(k * d_in), static_cast<Eigen::Index>(d_out));
        if (g.RequiresGrad(kernel)) {
          MatrixMap dk(g.Grad(kernel).data(), kmat.rows(), kmat.cols());
          dk.noalias() += cols.transpose() * dym;
        }
        if (g.RequiresGrad(bias)) GradMatrix(g, bias).row(0) += dym.colwise().sum();
        if (g.RequiresGrad(x)) {
          RowMatrix dcols = dym * kmat.transpose();
          double *dx = g.Grad(x).data();
          for (std::size_t b = 0; b < n; ++b)
            for (std::size_t t = 0; t < t_out; ++t) {
              const double *row = dcols.data() + (b * t_out + t) * k * d_in;
              for (std::size_t j = 0; j < k; ++j) {
                double *dst = dx + (b * t_in + t + j * dilation) * d_in;
                const double *src = row + j * d_in;
                for (std::size_t c = 0; c < d_in; ++c) dst[c] += src[c];
              }
            }
        }
      });
}

Var Relu(Var x) {
  Graph &g = GraphOf(x);
  Tensor y = x.value();
  y.DropGrad();
  for (double &v : y.values()) v = v > 0.0 ? v : 0.0;
  return g.Record("relu", std::move(y), std::span<const Var>(&x, 1),
                  [x](Graph &g, std::span<const double> dy) {
                    const Tensor &xt = g.Value(x);
                    auto dx = g.Grad(x);
                    for (std::size_t i = 0; i < dy.size(); ++i)
                      if (xt[i] > 0.0) dx[i] += dy[i];
                  });
}

namespace {

void CheckChannels(const Tensor &xt, std::size_t d) {
  Require(xt.rank() >= 1 && xt.shape().back() == d,
          "batchnorm1d: input " + ShapeString(xt.shape()) + " does not match " + std::to_string(d) +
              " channels");
}

Var EvalBatchNorm(Graph &g, Var x, Var gamma, Var beta, const BatchNorm &bn) {
  const Tensor &xt = x.value();
  const std::size_t d = bn.dim();
  auto xm = xt.AsMatrix();
  Eigen::RowVectorXd gm = g.Value(gamma).AsMatrix().row(0);
  Eigen::RowVectorXd bm = g.Value(beta).AsMatrix().row(0);
  Eigen::RowVectorXd scale(d), shift(d);
  for (std::size_t c = 0; c < d; ++c) {
    scale[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.epsilon);
    shift[c] = bn.running_mean[c];
  }
  RowMatrix xhat = (xm.rowwise() - shift).array().rowwise() * scale.array();
  Tensor y(xt.shape());
  y.AsMatrix() = (xhat.array().rowwise() * gm.array()).rowwise() + bm.array();
  std::vector<Var> inputs{x, gamma, beta};
  return g.Record("batchnorm1d", std::move(y), inputs,
                  [x, gamma, beta, scale, xhat = std::move(xhat)](Graph &g, std::span<const double> dy) {
                    auto dym = SpanMatrix(dy, xhat.rows(), xhat.cols());
                    Eigen::RowVectorXd gm = g.Value(gamma).AsMatrix().row(0);
                    if (g.RequiresGrad(x))
                      GradMatrix(g, x).array() += dym.array().rowwise() * (scale.array() * gm.array());
                    if (g.RequiresGrad(gamma))
                      GradMatrix(g, gamma).row(0) += (dym.array() * xhat.array()).colwise().sum().matrix();
                    if (g.RequiresGrad(beta)) GradMatrix(g, beta).row(0) += dym.colwise().sum();
                  });
}

}  // namespace

Var BatchNorm1d(Var x, const BatchNorm &bn) {
  Graph &g = GraphOf(x);
  CheckChannels(x.value(), bn.dim());
  return EvalBatchNorm(g, x, g.Parameter(bn.gamma), g.Parameter(bn.beta), bn);
}

Var BatchNorm1d(Var x, BatchNorm &bn, Mode mode, bool update_stats) {
  Graph &g = GraphOf(x);
  const Tensor &xt = x.value();
  const std::size_t d = bn.dim();
  CheckChannels(xt, d);
  Var gamma = g.Parameter(bn.gamma);
  Var beta = g.Parameter(bn.beta);
  if (mode == Mode::kEval) return EvalBatchNorm(g, x, gamma, beta, bn);

  auto xm = xt.AsMatrix();
  const Eigen::Index rows = xm.rows();
  std::vector<Var> inputs{x, gamma, beta};
  Eigen::RowVectorXd gm = bn.gamma.AsMatrix().row(0);
  Eigen::RowVectorXd bm = bn.beta.AsMatrix().row(0);
  Tensor y(xt.shape());
  auto ym = y.AsMatrix();

  if (rows < 2)
    throw BatchError("batchnorm1d: train mode needs at least 2 rows per channel, got " +
                     std::to_string(rows));
  Eigen::RowVectorXd mean = xm.colwise().mean();
  RowMatrix centered = xm.rowwise() - mean;
  Eigen::RowVectorXd var = centered.array().square().colwise().sum() / static_cast<double>(rows);
  Eigen::RowVectorXd inv_std = (var.array() + bn.epsilon).rsqrt();
  RowMatrix xhat = centered.array().rowwise() * inv_std.array();
  ym = (xhat.array().rowwise() * gm.array()).rowwise() + bm.array();
  if (update_stats) {
    for (std::size_t c = 0; c < d; ++c) {
      bn.running_mean[c] = bn.momentum * bn.running_mean[c] + (1.0 - bn.momentum) * mean[c];
      bn.running_var[c] = bn.momentum * bn.running_var[c] + (1.0 - bn.momentum) * var[c];
    }
  }
  return g.Record(
      "batchnorm1d", std::move(y), inputs,
      [x, gamma, beta, inv_std, xhat = std::move(xhat)](Graph &g, std::span<const double> dy) {
        auto dym = SpanMatrix(dy, xhat.rows(), xhat.cols());
        const double r = static_cast<double>(xhat.rows());
        Eigen::RowVectorXd sum_dy = dym.colwise().sum();
        Eigen::RowVectorXd sum_dy_xhat = (dym.array() * xhat.array()).colwise().sum();
        if (g.RequiresGrad(gamma)) GradMatrix(g, gamma).row(0) += sum_dy_xhat;
        if (g.RequiresGrad(beta)) GradMatrix(g, beta).row(0) += sum_dy;
        if (g.RequiresGrad(x)) {
          Eigen::RowVectorXd gm = g.Value(gamma).AsMatrix().row(0);
          Eigen::RowVectorXd coeff = (gm.array() * inv_std.array() / r).matrix();
          auto dx = GradMatrix(g, x);
          dx.array() += ((dym.array() * r).rowwise() - sum_dy.array() -
                         xhat.array().rowwise() * sum_dy_xhat.array())
                            .rowwise() *
                        coeff.array();
        }
      });
}

Var StatsPool(Var x) {
  Graph &g = GraphOf(x);
  const Tensor &xt = x.value();
  Require(xt.rank() == 2 || xt.rank() == 3,
          "stats_pool: input must be [T x D] or [N x T x D], got " + ShapeString(xt.shape()));
  const bool batched = xt.rank() == 3;
  const std::size_t n = batched ? xt.dim(0) : 1;
  const std::size_t t_len = xt.dim(batched ? 1 : 0);
  const std::size_t d = xt.shape().back();
  if (t_len == 0) throw InputLengthError("stats_pool: empty sequence");

  Tensor y(batched ? Shape{n, 2 * d} : Shape{2 * d});
  std::vector<double> mean(n * d), stddev(n * d);
  std::vector<bool> floored(n * d);
  RowMatrix cols(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t_len));
  const double inv_t = 1.0 / static_cast<double>(t_len);
  for (std::size_t b = 0; b < n; ++b) {
    cols = ConstMatrixMap(xt.data() + b * t_len * d, static_cast<Eigen::Index>(t_len), static_cast<Eigen::Index>(d))
               .transpose();
    for (std::size_t c = 0; c < d; ++c) {
      // Summing in sorted order makes the statistics exactly invariant to
      // any reordering of the frames.
      double *column = cols.data() + c * t_len;
      std::sort(column, column + t_len);
      double s = 0.0;
      for (std::size_t t = 0; t < t_len; ++t) s += column[t];
      const double m = s * inv_t;
      double ss = 0.0;
      for (std::size_t t = 0; t < t_len; ++t) ss += (column[t] - m) * (column[t] - m);
      const double var = ss * inv_t;
      const std::size_t i = b * d + c;
      mean[i] = m;
      floored[i] = var < kStatsPoolFloor;
      stddev[i] = std::sqrt(floored[i] ? kStatsPoolFloor : var);
      y[b * 2 * d + c] = m;
      y[b * 2 * d + d + c] = stddev[i];
    }
  }
  return g.Record("stats_pool", std::move(y), std::span<const Var>(&x, 1),
                  [x, n, t_len, d, mean = std::move(mean), stddev = std::move(stddev),
                   floored = std::move(floored)](Graph &g, std::span<const double> dy) {
                    const Tensor &xt = g.Value(x);
                    auto dx = g.Grad(x);
                    const double inv_t = 1.0 / static_cast<double>(t_len);
                    std::vector<double> dmean(d), dstd(d);
                    for (std::size_t b = 0; b < n; ++b) {
                      for (std::size_t c = 0; c < d; ++c) {
                        const std::size_t i = b * d + c;
                        dmean[c] = dy[b * 2 * d + c] * inv_t;
                        dstd[c] = floored[i] ? 0.0 : dy[b * 2 * d + d + c] * inv_t / stddev[i];
                      }
                      const double *mu = mean.data() + b * d;
                      for (std::size_t t = 0; t < t_len; ++t) {
                        const std::size_t row = (b * t_len + t) * d;
                        for (std::size_t c = 0; c < d; ++c)
                          dx[row + c] += dmean[c] + dstd[c] * (xt[row + c] - mu[c]);
                      }
                    }
                  });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels) {
  Graph &g = GraphOf(logits);
  const Tensor &lt = logits.value();
  Require(lt.rank() == 2, "softmax_cross_entropy: logits must be [N x S], got " + ShapeString(lt.shape()));
  const std::size_t n = lt.dim(0), s = lt.dim(1);
  Require(labels.size() == n, "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                  std::to_string(n) + " rows");
  if (n == 0) throw BatchError("softmax_cross_entropy: empty batch");
  RowMatrix prob(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= s)
      throw LabelError("softmax_cross_entropy: label " + std::to_string(labels[i]) + " outside [0," +
                       std::to_string(s) + ")");
    const double *row = lt.data() + i * s;
    const double mx = *std::max_element(row, row + s);
    double z = 0.0;
    for (std::size_t j = 0; j < s; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < s; ++j) prob(i, j) = std::exp(row[j] - lse);
    total += lse - row[labels[i]];
  }
  std::vector<int> label_copy(labels.begin(), labels.end());
  return g.Record("softmax_cross_entropy", Tensor::Scalar(total / static_cast<double>(n)),
                  std::span<const Var>(&logits, 1),
                  [logits, prob = std::move(prob), label_copy = std::move(label_copy)](
                      Graph &g, std::span<const double> dy) {
                    auto dl = GradMatrix(g, logits);
                    const double scale = dy[0] / static_cast<double>(prob.rows());
                    for (Eigen::Index i = 0; i < prob.rows(); ++i) {
                      dl.row(i) += scale * prob.row(i);
                      dl(i, label_copy[i]) -= scale;
                    }
                  });
}

Var MseSq(Var a, Var b) {
  Graph &g = GraphOf(a);
  RequireSameGraph(a, b);
  Require(a.shape() == b.shape(), Describe("mse_sq", a, b));
  const Tensor &at = a.value();
  const Tensor &bt = b.value();
  double s = 0.0;
  for (std::size_t i = 0; i < at.size(); ++i) s += (at[i] - bt[i]) * (at[i] - bt[i]);
  std::vector<Var> inputs{a, b};
  return g.Record("mse_sq", Tensor::Scalar(s), inputs, [a, b](Graph &g, std::span<const double> dy) {
    const Tensor &at = g.Value(a);
    const Tensor &bt = g.Value(b);
    if (g.RequiresGrad(a)) {
      auto da = g.Grad(a);
      for (std::size_t i = 0; i < at.size(); ++i) da[i] += 2.0 * (at[i] - bt[i]) * dy[0];
    }
    if (g.RequiresGrad(b)) {
      auto db = g.Grad(b);
      for (std::size_t i = 0; i < at.size(); ++i) db[i] -= 2.0 * (at[i] - bt[i]) * dy[0];
    }
  });
}

Var Add(Var a, Var b) {
  Graph &g = GraphOf(a);
  RequireSameGraph(a, b);
  Require(a.shape() == b.shape(), Describe("add", a, b));
  Tensor y = a.value();
  y.DropGrad();
  const Tensor &bt = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bt[i];
  std::vector<Var> inputs{a, b};
  return g.Record("add", std::move(y), inputs, [a, b](Graph &g, std::span<const double> dy) {
    for (Var v : {a, b}) {
      if (!g.RequiresGrad(v)) continue;
      auto d = g.Grad(v);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

Var Sub(Var a, Var b) {
  Graph &g = GraphOf(a);
  RequireSameGraph(a, b);
  Require(a.shape() == b.shape(), Describe("sub", a, b));
  Tensor y = a.value();
  y.DropGrad();
  const Tensor &bt = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bt[i];
  std::vector<Var> inputs{a, b};
  return g.Record("sub", std::move(y), inputs, [a, b](Graph &g, std::span<const double> dy) {
    if (g.RequiresGrad(a)) {
      auto d = g.Grad(a);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
    if (g.RequiresGrad(b)) {
      auto d = g.Grad(b);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] -= dy[i];
    }
  });
}

Var Scale(Var a, double s) {
  Graph &g = GraphOf(a);
  Tensor y = a.value();
  y.DropGrad();
  for (double &v : y.values()) v *= s;
  return g.Record("scale", std::move(y), std::span<const Var>(&a, 1),
                  [a, s](Graph &g, std::span<const double> dy) {
                    auto d = g.Grad(a);
                    for (std::size_t i = 0; i < dy.size(); ++i) d[i] += s * dy[i];
                  });
}

Var Sum(Var x) {
  Graph &g = GraphOf(x);
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return g.Record("sum", Tensor::Scalar(s), std::span<const Var>(&x, 1),
                  [x](Graph &g, std::span<const double> dy) {
                    for (double &d : g.Grad(x)) d += dy[0];
                  });
}

Var GatherColumns(Var m, std::span<const int> idx) {
  Graph &g = GraphOf(m);
  const Tensor &mt = m.value();
  Require(mt.rank() == 2, "gather_columns: matrix expected, got " + ShapeString(mt.shape()));
  const std::size_t e = mt.dim(0), s = mt.dim(1), n = idx.size();
  Tensor y(Shape{n, e});
  for (std::size_t i = 0; i < n; ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= s)
      throw LabelError("gather_columns: index " + std::to_string(idx[i]) + " outside [0," + std::to_string(s) +
                       ")");
    for (std::size_t r = 0; r < e; ++r) y[i * e + r] = mt[r * s + idx[i]];
  }
  std::vector<int> idx_copy(idx.begin(), idx.end());
  return g.Record("gather_columns", std::move(y), std::span<const Var>(&m, 1),
                  [m, e, s, idx_copy = std::move(idx_copy)](Graph &g, std::span<const double> dy) {
                    auto dm = g.Grad(m);
                    for (std::size_t i = 0; i < idx_copy.size(); ++i)
                      for (std::size_t r = 0; r < e; ++r) dm[r * s + idx_copy[i]] += dy[i * e + r];
                  });
}

Var RowNorms(Var x) {
  Graph &g = GraphOf(x);
  const Tensor &xt = x.value();
  Require(xt.rank() == 2, "row_norms: matrix expected, got " + ShapeString(xt.shape()));
  const std::size_t n = xt.dim(0), d = xt.dim(1);
  Tensor y(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += xt[i * d + j] * xt[i * d + j];
    y[i] = std::sqrt(s);
  }
  std::vector<double> norms(y.values().begin(), y.values().end());
  return g.Record("row_norms", std::move(y), std::span<const Var>(&x, 1),
                  [x, n, d, norms = std::move(norms)](Graph &g, std::span<const double> dy) {
                    const Tensor &xt = g.Value(x);
                    auto dx = g.Grad(x);
                    for (std::size_t i = 0; i < n; ++i) {
                      if (norms[i] == 0.0) continue;
                      for (std::size_t j = 0; j < d; ++j) dx[i * d + j] += dy[i] * xt[i * d + j] / norms[i];
                    }
                  });
}

}  // namespace diff
}  // namespace xvec
