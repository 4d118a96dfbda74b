// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "amd/synth/image.hpp"
#include "json.hpp"

namespace amd::synth {

/// Controlled difference between a source and a target domain. Applied as
/// slant shear, then stroke morphology, then polarity and background level,
/// then additive noise.
struct DomainShiftConfig {
  double slant_deg = 0.0;
  int thickness_delta = 0;        // > 0 dilates strokes, < 0 erodes, in pixels
  bool invert = false;
  double background_delta = 0.0;  // added to paper pixels, fraction of full scale
  double noise_sigma = 0.0;       // fraction of full scale

  bool is_identity() const {
    return slant_deg == 0.0 && thickness_delta == 0 && !invert && background_delta == 0.0 && noise_sigma == 0.0;
  }
};

Image apply_domain_shift(const Image& img, const DomainShiftConfig& shift, std::uint64_t seed);

nlohmann::json to_json(const DomainShiftConfig& s);
DomainShiftConfig shift_from_json(const nlohmann::json& j);

}  // namespace amd::synth
