// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "amd/autodiff/tensor.hpp"

namespace amd::testing {

inline ad::Tensor random_tensor(std::mt19937_64& rng, ad::Shape shape, double lo = -1.0, double hi = 1.0,
                                bool requires_grad = false) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = u(rng);
  return ad::Tensor::from(std::move(shape), std::move(v), requires_grad);
}

/// Random probability rows over the last axis of [B,K,C].
inline std::vector<double> random_distributions(std::mt19937_64& rng, std::size_t rows, std::size_t classes,
                                                double peak = 3.0) {
  std::normal_distribution<double> n(0.0, peak);
  std::vector<double> out(rows * classes);
  for (std::size_t r = 0; r < rows; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      out[r * classes + c] = std::exp(n(rng));
      z += out[r * classes + c];
    }
    for (std::size_t c = 0; c < classes; ++c) out[r * classes + c] /= z;
  }
  return out;
}

}  // namespace amd::testing
