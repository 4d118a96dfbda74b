// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "amd/errors.hpp"

namespace amd::ad {

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor>& inputs, double h) {
  if (!(h >= 1e-7 && h <= 1e-5)) throw DomainError("grad_check step must lie in [1e-7, 1e-5]");
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tensor out = f(inputs);
  if (!std::isfinite(out.item())) throw DomainError("grad_check: non-finite function value");
  backward(out);

  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto vals = inputs[i].mutable_values();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double saved = vals[j];
      vals[j] = saved + h;
      const double fp = f(inputs).item();
      vals[j] = saved - h;
      const double fm = f(inputs).item();
      vals[j] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) throw DomainError("grad_check: non-finite intermediate");
      const double numeric = (fp - fm) / (2.0 * h);
      const double err = std::abs(analytic[i][j] - numeric) / std::max(1.0, std::abs(numeric));
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_input = i;
        result.worst_index = j;
      }
    }
  }
  return result;
}

}  // namespace amd::ad
