// src/diff/adam.cc

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

#include "xvec/diff/adam.h"

#include <cmath>
#include <string>

#include "xvec/base/error.h"

namespace xvec {
namespace diff {

void Adam::Step(std::span<Tensor *const> params) {
  if (m_.empty()) {
    for (Tensor *p : params) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameters given, state holds " +
                         std::to_string(m_.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    if (m_[i].size() != params[i]->size())
      throw DimensionError("adam: parameter " + std::to_string(i) + " has " +
                           std::to_string(params[i]->size()) + " values, moments hold " +
                           std::to_string(m_[i].size()));

  ++t_;
  const auto &o = options_;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor &p = *params[i];
    std::span<const double> grad = static_cast<const Tensor &>(p).grad();
    const bool has_grad = !grad.empty();
    auto &m = m_[i];
    auto &v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = (has_grad ? grad[j] : 0.0) + o.weight_decay * p[j];
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g;
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

void Adam::Write(BinaryWriter &out) const {
  out.WriteF64(options_.learning_rate);
  out.WriteF64(options_.beta1);
  out.WriteF64(options_.beta2);
  out.WriteF64(options_.epsilon);
  out.WriteF64(options_.weight_decay);
  out.WriteU64(t_);
  out.WriteU64(m_.size());
  for (std::size_t i = 0; i < m_.size(); ++i) {
    out.WriteF64Vector(m_[i]);
    out.WriteF64Vector(v_[i]);
  }
}

Adam Adam::Read(BinaryReader &in) {
  AdamOptions o;
  o.learning_rate = in.ReadF64();
  o.beta1 = in.ReadF64();
  o.beta2 = in.ReadF64();
  o.epsilon = in.ReadF64();
  o.weight_decay = in.ReadF64();
  Adam adam(o);
  adam.t_ = in.ReadU64();
  std::uint64_t n = in.ReadU64();
  for (std::uint64_t i = 0; i < n; ++i) {
    adam.m_.push_back(in.ReadF64Vector());
    adam.v_.push_back(in.ReadF64Vector());
    if (adam.m_.back().size() != adam.v_.back().size())
      throw FormatError(in.source() + ": adam moment size mismatch near byte offset " +
                        std::to_string(in.offset()));
  }
  return adam;
}

}  // namespace diff
}  // namespace xvec
