// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace amd::synth {

/// 8-bit grayscale image, row-major; 255 is white.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::uint8_t fill = 255) : height(h), width(w), pixels(h * w, fill) {}

  std::uint8_t at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Working buffer with values on the 0..255 scale.
struct FloatImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> v;

  double& at(std::size_t y, std::size_t x) { return v[y * width + x]; }
  double at(std::size_t y, std::size_t x) const { return v[y * width + x]; }
  /// Bilinear lookup at a continuous position; `fill` outside the image.
  double sample(double y, double x, double fill) const;
};

FloatImage to_float(const Image& img);
/// Rounds to the nearest integer and clamps to 0..255.
Image quantize(const FloatImage& f);

/// Median pixel value; the background level of a mostly-blank word image.
std::uint8_t median_level(const Image& img);

/// Resamples to `height` rows keeping the aspect ratio (bilinear, pixel
/// centres aligned). Width becomes max(1, round(w * height / h)).
Image resize_to_height(const Image& img, std::size_t height);

/// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const Image& img);
/// Throws IoError on unreadable or malformed files.
Image read_pgm(const std::filesystem::path& path);

}  // namespace amd::synth
