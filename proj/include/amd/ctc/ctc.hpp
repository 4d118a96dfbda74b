// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "amd/autodiff/tensor.hpp"
#include "amd/recognizer/recognizer.hpp"

namespace amd::ctc {

/// Class indices over the blank-augmented alphabet; 0 is blank.
using Path = std::vector<int>;
/// Blank-free class indices.
using Labels = std::vector<int>;

/// Shortest alignment able to emit `target`: its length plus one blank
/// between every pair of equal neighbours.
std::size_t min_frames(const Labels& target);

/// Mean over the batch of -log P(target | frames), summed over all alignments
/// with a log-space forward/backward pass. Differentiable w.r.t. log_probs
/// [B,K,C]; frames at or beyond lengths[b] are ignored. Throws
/// InfeasibleTargetError when a target needs more frames than its sample has.
ad::Tensor ctc_loss(const ad::Tensor& log_probs, std::span<const std::size_t> lengths,
                    const std::vector<Labels>& targets);
inline ad::Tensor ctc_loss(const model::FrameDistributions& y, const std::vector<Labels>& targets) {
  return ctc_loss(y.log_probs, y.lengths, targets);
}

/// Per-frame argmax over the valid frames of every sample, ties to the lowest
/// class index.
std::vector<Path> greedy_decode(const model::FrameDistributions& y);
Path greedy_path(std::span<const double> frames, std::size_t length, std::size_t classes);

/// Merges runs of equal symbols, then drops blanks.
Labels collapse(const Path& path);

}  // namespace amd::ctc
