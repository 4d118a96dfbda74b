// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::ad {

std::pair<Tensor, Tensor> channel_moments(const Tensor& x, std::span<const std::size_t> valid_width) {
  if (x.rank() != 4) throw ShapeError("channel_moments expects [B,C,H,W]");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (!valid_width.empty() && valid_width.size() != B) throw ShapeError("one valid width per sample required");
  std::vector<std::size_t> widths(B, W);
  for (std::size_t b = 0; b < valid_width.size(); ++b) widths[b] = std::min(valid_width[b], W);
  std::size_t count = 0;
  for (auto w : widths) count += H * w;
  if (count < 2) throw DomainError("batch statistics need at least two spatial elements per channel");

  auto xv = x.values();
  const double inv_n = 1.0 / static_cast<double>(count);
  std::vector<double> mu(C, 0.0), var(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double s = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double* plane = xv.data() + (b * C + c) * H * W;
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t w = 0; w < widths[b]; ++w) s += plane[y * W + w];
      }
    }
    mu[c] = s * inv_n;
    double q = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double* plane = xv.data() + (b * C + c) * H * W;
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t w = 0; w < widths[b]; ++w) {
          const double d = plane[y * W + w] - mu[c];
          q += d * d;
        }
      }
    }
    var[c] = q * inv_n;
  }

  // Mean and variance are separate outputs; each backward only touches x.
  auto for_each_valid = [B, C, H, W, widths](std::size_t c, auto&& fn) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t base = (b * C + c) * H * W;
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t w = 0; w < widths[b]; ++w) fn(base + y * W + w);
      }
    }
  };
  std::vector<double> mu_copy = mu;
  Tensor mean_t = Tensor::make_result({C}, std::move(mu), {x}, [x, C, inv_n, for_each_valid](std::span<const double> g) {
    auto gx = x.grad_accumulator();
    for (std::size_t c = 0; c < C; ++c) {
      const double d = g[c] * inv_n;
      for_each_valid(c, [&](std::size_t j) { gx[j] += d; });
    }
  });
  Tensor var_t = Tensor::make_result(
      {C}, std::move(var), {x}, [x, C, inv_n, mu = std::move(mu_copy), for_each_valid](std::span<const double> g) {
        auto gx = x.grad_accumulator();
        auto xv = x.values();
        for (std::size_t c = 0; c < C; ++c) {
          const double d = 2.0 * g[c] * inv_n;
          for_each_valid(c, [&](std::size_t j) { gx[j] += d * (xv[j] - mu[c]); });
        }
      });
  return {mean_t, var_t};
}

Tensor batch_norm(const Tensor& x, const Tensor& mean, const Tensor& var, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  if (x.rank() != 4) throw ShapeError("batch_norm expects [B,C,H,W]");
  const std::size_t B = x.dim(0), C = x.dim(1), S = x.dim(2) * x.dim(3);
  for (const Tensor* t : {&mean, &var, &gamma, &beta}) {
    if (t->rank() != 1 || t->dim(0) != C) throw ShapeError("batch_norm per-channel operand must be [C]");
  }
  if (!(eps > 0.0)) throw DomainError("batch_norm epsilon must be positive");
  auto xv = x.values();
  auto mv = mean.values();
  auto vv = var.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  std::vector<double> inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (vv[c] + eps <= 0.0) throw DomainError("batch_norm variance must be non-negative");
    inv_std[c] = 1.0 / std::sqrt(vv[c] + eps);
  }
  std::vector<double> out(xv.size());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t base = (b * C + c) * S;
      for (std::size_t s = 0; s < S; ++s) out[base + s] = gv[c] * (xv[base + s] - mv[c]) * inv_std[c] + bv[c];
    }
  }
  return Tensor::make_result(
      x.shape(), std::move(out), {x, mean, var, gamma, beta},
      [x, mean, var, gamma, beta, B, C, S, inv_std = std::move(inv_std)](std::span<const double> g) {
        auto xv = x.values();
        auto mv = mean.values();
        auto gv = gamma.values();
        std::vector<double> sum_g(C, 0.0), sum_gx(C, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t c = 0; c < C; ++c) {
            const std::size_t base = (b * C + c) * S;
            for (std::size_t s = 0; s < S; ++s) {
              sum_g[c] += g[base + s];
              sum_gx[c] += g[base + s] * (xv[base + s] - mv[c]);
            }
          }
        }
        if (x.requires_grad()) {
          auto gx = x.grad_accumulator();
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t c = 0; c < C; ++c) {
              const std::size_t base = (b * C + c) * S;
              const double k = gv[c] * inv_std[c];
              for (std::size_t s = 0; s < S; ++s) gx[base + s] += g[base + s] * k;
            }
          }
        }
        if (mean.requires_grad()) {
          auto gm = mean.grad_accumulator();
          for (std::size_t c = 0; c < C; ++c) gm[c] -= sum_g[c] * gv[c] * inv_std[c];
        }
        if (var.requires_grad()) {
          auto gvar = var.grad_accumulator();
          for (std::size_t c = 0; c < C; ++c) gvar[c] += -0.5 * gv[c] * sum_gx[c] * inv_std[c] * inv_std[c] * inv_std[c];
        }
        if (gamma.requires_grad()) {
          auto gg = gamma.grad_accumulator();
          for (std::size_t c = 0; c < C; ++c) gg[c] += sum_gx[c] * inv_std[c];
        }
        if (beta.requires_grad()) {
          auto gb = beta.grad_accumulator();
          for (std::size_t c = 0; c < C; ++c) gb[c] += sum_g[c];
        }
      });
}

}  // namespace amd::ad
