// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amd/autodiff/tensor.hpp"
#include "amd/recognizer/batch_norm.hpp"
#include "amd/recognizer/image_batch.hpp"
#include "amd/recognizer/model_config.hpp"

namespace amd::model {

/// Per-frame class distributions for a batch, shape [B, K, C].
/// Frames k >= lengths[b] are padding and must be ignored by every loss.
struct FrameDistributions {
  ad::Tensor probs;
  ad::Tensor log_probs;
  std::vector<std::size_t> lengths;

  std::size_t batch() const { return probs.dim(0); }
  std::size_t frames() const { return probs.dim(1); }
  std::size_t classes() const { return probs.dim(2); }
};

enum class Mode {
  kTrain,  // batch statistics normalize, running statistics are updated
  kEval,   // running statistics normalize
  kAdapt,  // running statistics normalize (by default); batch statistics of
           // the selected layers are returned for alignment
};

struct ForwardOptions {
  Mode mode = Mode::kEval;
  std::set<std::size_t> stats_layers;  // BN ids whose batch statistics to return
  bool adapt_normalize_with_batch_stats = false;
};

/// Pre-normalization batch statistics of one BN layer.
struct LayerBatchStats {
  std::size_t layer_id = 0;
  ad::Tensor mean;
  ad::Tensor var;
};

struct ForwardResult {
  FrameDistributions frames;
  std::vector<LayerBatchStats> batch_stats;  // ascending layer id
};

enum class ParamKind { kConvWeight, kConvBias, kBnGamma, kBnBeta, kRecurrent, kHeadWeight, kHeadBias };

struct Parameter {
  std::string name;
  ad::Tensor tensor;
  std::size_t depth = 0;               // position along the network
  ParamKind kind = ParamKind::kConvWeight;
  std::optional<std::size_t> bn_id;    // set for BN gamma/beta
};

struct ParameterPartition {
  std::vector<std::string> trainable;
  std::vector<std::string> frozen;
};

class Recognizer {
 public:
  Recognizer(ModelConfig config, std::uint64_t init_seed);
  // Parameters are shared tensor handles, so copies must be explicit.
  Recognizer(const Recognizer&) = delete;
  Recognizer& operator=(const Recognizer&) = delete;
  Recognizer(Recognizer&&) = default;
  Recognizer& operator=(Recognizer&&) = default;

  /// Deep copy, including running statistics and requires_grad flags.
  Recognizer clone() const;

  const ModelConfig& config() const { return config_; }

  ForwardResult forward(const ImageBatch& batch, const ForwardOptions& options);

  /// Every learnable tensor in network order.
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(const std::string& name);
  const Parameter& parameter(const std::string& name) const;

  std::vector<BatchNormLayer>& bn_layers() { return bn_; }
  const std::vector<BatchNormLayer>& bn_layers() const { return bn_; }

  /// Trainable = parameters strictly before the deepest selected BN layer,
  /// minus gamma/beta of every selected BN layer. Everything else (including
  /// running statistics, recurrence and head) is frozen. Sets requires_grad
  /// accordingly. Throws ConfigError for unknown ids or an empty selection.
  ParameterPartition set_trainable_scope(const std::set<std::size_t>& selected_bn_layers);
  /// Makes every parameter trainable (source training).
  void set_all_trainable();
  std::vector<Parameter*> trainable_parameters();

  /// Flat copy of every parameter and running statistic, keyed by name.
  std::map<std::string, std::vector<double>> state() const;
  void load_state(const std::map<std::string, std::vector<double>>& state);

 private:
  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<BatchNormLayer> bn_;
  std::vector<std::optional<std::size_t>> block_bn_;  // BN index per block
};

}  // namespace amd::model
