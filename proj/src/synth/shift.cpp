// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/synth/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amd/errors.hpp"
#include "amd/rng.hpp"

namespace amd::synth {

namespace {

constexpr std::uint64_t kNoiseStream = 0x5E;

// One 3x3 min (dilate dark ink) or max (erode) pass.
Image morph(const Image& img, bool dilate_ink) {
  Image out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      std::uint8_t v = img.at(y, x);
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(img.height) || xx >= static_cast<long>(img.width)) continue;
          const std::uint8_t n = img.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
          v = dilate_ink ? std::min(v, n) : std::max(v, n);
        }
      }
      out.at(y, x) = v;
    }
  }
  return out;
}

}  // namespace

Image apply_domain_shift(const Image& img, const DomainShiftConfig& shift, std::uint64_t seed) {
  Image out = img;
  if (shift.slant_deg != 0.0) {
    const FloatImage f = to_float(out);
    const double fill = median_level(out);
    const double k = std::tan(shift.slant_deg * std::numbers::pi / 180.0);
    const double cy = 0.5 * static_cast<double>(img.height - 1);
    FloatImage g{f.height, f.width, std::vector<double>(f.v.size())};
    for (std::size_t y = 0; y < f.height; ++y) {
      const double off = (cy - static_cast<double>(y)) * k;
      for (std::size_t x = 0; x < f.width; ++x) g.at(y, x) = f.sample(static_cast<double>(y), static_cast<double>(x) - off, fill);
    }
    out = quantize(g);
  }
  for (int i = 0; i < std::abs(shift.thickness_delta); ++i) out = morph(out, shift.thickness_delta > 0);
  if (shift.invert || shift.background_delta != 0.0) {
    for (auto& p : out.pixels) {
      const double paper = p / 255.0;
      double v = shift.invert ? 255.0 - p : static_cast<double>(p);
      v += shift.background_delta * 255.0 * paper;
      p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  if (shift.noise_sigma > 0.0) {
    SplitMix64 rng(derive_seed(seed, 0, kNoiseStream));
    for (auto& p : out.pixels) {
      const double v = p + 255.0 * shift.noise_sigma * rng.normal();
      p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

nlohmann::json to_json(const DomainShiftConfig& s) {
  return {{"slant_deg", s.slant_deg},
          {"thickness_delta", s.thickness_delta},
          {"invert", s.invert},
          {"background_delta", s.background_delta},
          {"noise_sigma", s.noise_sigma}};
}

DomainShiftConfig shift_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("shift: expected an object");
  DomainShiftConfig s;
  for (const auto& [key, value] : j.items()) {
    if (key == "slant_deg") s.slant_deg = value.get<double>();
    else if (key == "thickness_delta") s.thickness_delta = value.get<int>();
    else if (key == "invert") s.invert = value.get<bool>();
    else if (key == "background_delta") s.background_delta = value.get<double>();
    else if (key == "noise_sigma") s.noise_sigma = value.get<double>();
    else throw ConfigError("shift." + key + ": unknown key");
  }
  if (s.noise_sigma < 0.0) throw ConfigError("shift.noise_sigma: must be non-negative");
  return s;
}

}  // namespace amd::synth
