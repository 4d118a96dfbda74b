// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "amd/autodiff/tensor.hpp"

namespace amd::ad {

// ---------------------------------------------------------------------------
// Elementwise. Binary ops broadcast numpy-style (shapes aligned on the right,
// extents equal or 1).

Shape broadcast_shape(const Shape& a, const Shape& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// Throws DomainError on a zero divisor.
Tensor div(const Tensor& a, const Tensor& b);

Tensor exp(const Tensor& a);
/// Throws DomainError for non-positive inputs; clamp_min first where zeros
/// can occur.
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
/// max(a, floor). The gradient is passed through only where a > floor.
Tensor clamp_min(const Tensor& a, double floor);
Tensor scale(const Tensor& a, double factor);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

// ---------------------------------------------------------------------------
// Shape manipulation.

Tensor reshape(const Tensor& a, Shape shape);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

// ---------------------------------------------------------------------------
// Reductions.

enum class Reduce { kSum, kMean };

/// Reduces over `axes` (dropped from the result). An empty axis list reduces
/// everything to shape [1].
Tensor reduce(Reduce kind, const Tensor& a, const std::vector<std::size_t>& axes = {});
inline Tensor sum(const Tensor& a, const std::vector<std::size_t>& axes = {}) {
  return reduce(Reduce::kSum, a, axes);
}
inline Tensor mean(const Tensor& a, const std::vector<std::size_t>& axes = {}) {
  return reduce(Reduce::kMean, a, axes);
}

Tensor softmax(const Tensor& a, std::size_t axis);
Tensor log_softmax(const Tensor& a, std::size_t axis);

// ---------------------------------------------------------------------------
// Dense layers.

/// [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);
/// input [B,F_in], weight [F_out,F_in], bias [F_out] -> [B,F_out].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Cross-correlation. input [B,C,H,W], kernel [O,C,kh,kw], bias [O].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              std::size_t padding);

/// 2x2 max pooling with stride 2; H and W must be even.
Tensor maxpool2(const Tensor& input);

// ---------------------------------------------------------------------------
// Normalization.

/// Per-channel biased mean and variance of x [B,C,H,W] over batch and
/// spatial positions. When `valid_width` is non-empty only columns
/// w < valid_width[b] of sample b contribute.
std::pair<Tensor, Tensor> channel_moments(const Tensor& x, std::span<const std::size_t> valid_width = {});

/// gamma * (x - mean) / sqrt(var + eps) + beta, per channel of x [B,C,H,W].
Tensor batch_norm(const Tensor& x, const Tensor& mean, const Tensor& var, const Tensor& gamma,
                  const Tensor& beta, double eps);

// ---------------------------------------------------------------------------
// Recurrence.

/// Gated recurrent unit over x [B,K,F] with per-sample valid lengths.
/// w_ih [3H,F], w_hh [3H,H], b_ih [3H], b_hh [3H] with gate blocks ordered
/// (reset, update, candidate). Reverse runs each sample from its last valid
/// frame back to frame 0. Frames at or beyond a sample's length are zero.
Tensor gru(const Tensor& x, std::span<const std::size_t> lengths, const Tensor& w_ih, const Tensor& w_hh,
           const Tensor& b_ih, const Tensor& b_hh, bool reverse);

}  // namespace amd::ad
