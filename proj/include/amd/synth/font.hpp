// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amd/synth/image.hpp"
#include "json.hpp"

namespace amd::synth {

struct Point {
  double x = 0.0;  // 0 = left edge of the glyph box
  double y = 0.0;  // 0 = top edge
};

/// Connected stroke through its points, in unit glyph-box coordinates.
using Polyline = std::vector<Point>;

struct GlyphFont {
  std::map<char32_t, std::vector<Polyline>> glyphs;
  double slant_deg = 0.0;
  double thickness_scale = 1.0;
  /// Random per-sample perturbation of stroke endpoints, in box units.
  double jitter = 0.03;

  bool has(char32_t c) const { return glyphs.contains(c); }
};

/// Hand-drawn strokes for a-z and 0-9.
GlyphFont default_font();

/// Glyph box width for a given image height.
inline std::size_t glyph_width(std::size_t height) { return height / 2; }

/// Dark anti-aliased strokes on a white background; width = |text| glyph
/// boxes. Throws DomainError for empty text and ConfigError for a character
/// the font lacks.
Image render_word(std::u32string_view text, const GlyphFont& font, std::size_t height, std::uint64_t seed);

nlohmann::json font_style_to_json(const GlyphFont& font);
/// Reads slant/thickness/jitter over the default glyph set.
GlyphFont font_from_json(const nlohmann::json& j);

}  // namespace amd::synth
