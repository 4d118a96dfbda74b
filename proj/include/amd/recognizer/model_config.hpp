// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "amd/text/alphabet.hpp"
#include "json.hpp"

namespace amd::model {

enum class Activation { kLeakyRelu, kRelu, kNone };

struct ConvBlockConfig {
  std::size_t channels = 8;
  bool batch_norm = true;
  Activation activation = Activation::kLeakyRelu;
  bool pool = false;
};

/// Desk-scale recognizer layout: conv3x3 blocks, one (bi)directional GRU
/// layer and a linear head over |alphabet| + 1 classes.
struct ModelConfig {
  std::size_t height = 32;
  std::vector<ConvBlockConfig> blocks{
      {8, true, Activation::kLeakyRelu, true},
      {16, true, Activation::kLeakyRelu, true},
      {32, true, Activation::kLeakyRelu, false},
  };
  std::size_t hidden = 64;
  bool bidirectional = true;
  double leaky_slope = 0.01;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  text::Alphabet alphabet;

  /// Throws ConfigError on an unusable layout (no BN layer, height not
  /// divisible by the pooling schedule, ...).
  void validate() const;

  /// Horizontal (and vertical) downsampling of the whole trunk.
  std::size_t downsample() const;
  /// Output frame count for an image of the given width: ceil(width / d).
  std::size_t frames_for_width(std::size_t width) const;
  std::size_t bn_count() const;
  /// Index of the block holding BN layer `bn_id`.
  std::size_t block_of_bn(std::size_t bn_id) const;
  /// Features per frame entering the recurrent layer.
  std::size_t frame_features() const;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace amd::model
