// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "amd/autodiff/tensor.hpp"

namespace amd::ad {

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
};

/// Compares backward() against central differences over every coordinate of
/// every input: max |analytic - numeric| / max(1, |numeric|). The inputs are
/// perturbed in place and restored. Throws DomainError when a perturbed
/// evaluation is non-finite.
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor>& inputs, double h = 1e-6);

}  // namespace amd::ad
