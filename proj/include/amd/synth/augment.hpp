// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amd/synth/image.hpp"
#include "json.hpp"

namespace amd::synth {

enum class TransformKind { kElastic, kRotation, kColorJitter, kGaussianBlur, kErase, kPerspective, kAffine };

/// One pipeline stage. Only the fields of its kind are read.
struct Transform {
  TransformKind kind = TransformKind::kRotation;
  double probability = 0.0;

  double magnitude = 0.0;   // elastic: displacement scale in pixels
  double smoothness = 1.0;  // elastic: Gaussian sigma of the displacement field
  double degrees = 0.0;     // rotation, affine: maximum absolute angle
  double brightness = 0.0;  // color jitter: factor drawn from [1-b, 1+b]
  double contrast = 0.0;    // color jitter: factor drawn from [1-c, 1+c]
  std::size_t kernel = 5;   // blur: odd kernel size
  double sigma_min = 0.1;   // blur
  double sigma_max = 0.5;   // blur
  double scale_min = 0.01;  // erase: area fraction; affine: zoom
  double scale_max = 0.03;
  double aspect_min = 0.2;  // erase
  double aspect_max = 3.2;
  double distortion = 0.0;  // perspective: corner displacement fraction
  double translate = 0.0;   // affine: fraction of each extent
  double shear_x = 0.0;     // affine: maximum absolute shear angles
  double shear_y = 0.0;
};

struct AugmentationPipeline {
  std::vector<Transform> transforms;
  /// Keys accepted but without effect on grayscale images (hue, saturation).
  std::vector<std::string> ignored;
};

/// Applies each stage in order; stage t fires with its probability from the
/// stream derive_seed(seed, t, augment stream). Output dimensions equal the
/// input's.
Image augment(const Image& img, const AugmentationPipeline& pipeline, std::uint64_t seed);

/// Stage-wise presets at 32-px height. Displacement, kernel and blur ranges
/// scale linearly with height from their 128-px originals (elastic 20 -> 5,
/// smoothness 4 -> 1, blur kernel 23 -> 5).
AugmentationPipeline pretrain_pipeline(std::size_t height = 32);
AugmentationPipeline synthetic_pipeline(std::size_t height = 32);

nlohmann::json to_json(const AugmentationPipeline& p);
/// Accepts {"preset": "pretrain"|"synthetic"|"none"} or {"transforms": [...]}.
/// Unknown keys raise ConfigError; hue and saturation are recorded in
/// `ignored`.
AugmentationPipeline pipeline_from_json(const nlohmann::json& j, std::size_t height = 32);

}  // namespace amd::synth
