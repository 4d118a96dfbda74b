// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "amd/recognizer/recognizer.hpp"

namespace amd::harness {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<model::Parameter*> params, AdamConfig config);

  /// Applies one update from the accumulated gradients, then clears them.
  void step();
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  std::vector<model::Parameter*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace amd::harness
