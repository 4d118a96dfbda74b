// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/harness/optimizer.hpp"

#include <cmath>

#include "amd/errors.hpp"

namespace amd::harness {

Adam::Adam(std::vector<model::Parameter*> params, AdamConfig config) : params_(std::move(params)), cfg_(config) {
  if (!(cfg_.lr > 0.0)) throw ConfigError("optimizer.lr: must be positive");
  for (auto* p : params_) {
    m_.emplace_back(p->tensor.numel(), 0.0);
    v_.emplace_back(p->tensor.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i]->tensor;
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto w = t.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      w[j] -= cfg_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (auto* p : params_) p->tensor.zero_grad();
}

}  // namespace amd::harness
