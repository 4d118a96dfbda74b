// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Source-free adaptation objective for CTC recognizers:
//   align     - KL between target batch and stored source BN statistics
//   minimize  - mean per-frame prediction entropy
//   diversify - negative entropy of the batch-averaged frame distribution
//   total     = w_align * align + w_minimize * minimize + w_diversify * diversify

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "amd/autodiff/tensor.hpp"
#include "amd/recognizer/recognizer.hpp"

namespace amd::loss {

struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> var;
};

/// Stored source statistics keyed by BN layer id.
using SourceStats = std::map<std::size_t, GaussianStats>;

/// Copies the running statistics of the given layers. Throws ContractError
/// when a layer was never trained.
SourceStats extract_source_stats(const model::Recognizer& model, const std::set<std::size_t>& layers);

struct AmdWeights {
  double align = 1.0;
  double minimize = 1.0;
  double diversify = 1.0;
  double eps_p = 1e-4;

  bool all_zero() const { return align == 0.0 && minimize == 0.0 && diversify == 0.0; }
  /// Throws ConfigError on negative weights or eps_p outside (0, 1).
  void validate() const;
};

enum class DiversifyForm {
  kAveragedProbs,   // entropy of the batch-mean probabilities (default)
  kAveragedLogits,  // softmax of the batch-mean log-probabilities
  kLiteral,         // batch mean of per-sample y*log(y); equals -minimize
};

struct AlignResult {
  ad::Tensor total;
  std::map<std::size_t, double> per_layer;
};

/// Sum over layers of the channel-averaged KL(target batch || source).
/// `variance_floor` is added to both variances; pass the BN epsilon to keep
/// degenerate channels finite. Throws ConfigError when the layer sets differ.
AlignResult align_loss(const std::vector<model::LayerBatchStats>& batch_stats, const SourceStats& source,
                       double variance_floor = 0.0);

/// -sum y*log(max(y, eps_p)) over valid frames / (valid frames * classes).
ad::Tensor minimize_loss(const model::FrameDistributions& y, double eps_p = 1e-4);

/// sum ybar*log(max(ybar, eps_p)) / (frames * classes), where ybar averages
/// the valid samples of each frame.
ad::Tensor diversify_loss(const model::FrameDistributions& y, double eps_p = 1e-4,
                          DiversifyForm form = DiversifyForm::kAveragedProbs);

struct AmdLossReport {
  ad::Tensor total;
  double align = 0.0;
  double minimize = 0.0;
  double diversify = 0.0;
  double value = 0.0;
  std::map<std::size_t, double> align_per_layer;
};

AmdLossReport amd_loss(const model::ForwardResult& forward, const SourceStats& source, const AmdWeights& weights,
                       double variance_floor = 0.0, DiversifyForm form = DiversifyForm::kAveragedProbs);

}  // namespace amd::loss
