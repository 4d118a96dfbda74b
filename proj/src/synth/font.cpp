// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/synth/font.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amd/errors.hpp"
#include "amd/rng.hpp"
#include "amd/text/alphabet.hpp"

namespace amd::synth {

namespace {

constexpr std::uint64_t kJitterStream = 0x61;

double segment_distance(double px, double py, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - px, ey = a.y + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace

GlyphFont default_font() {
  GlyphFont f;
  auto& g = f.glyphs;
  g[U'a'] = {{{.75, .45}, {.75, .8}}, {{.75, .5}, {.45, .45}, {.25, .6}, {.45, .8}, {.75, .7}}};
  g[U'b'] = {{{.25, .15}, {.25, .8}}, {{.25, .5}, {.55, .45}, {.75, .62}, {.55, .8}, {.25, .75}}};
  g[U'c'] = {{{.75, .48}, {.45, .45}, {.25, .62}, {.45, .8}, {.75, .77}}};
  g[U'd'] = {{{.75, .15}, {.75, .8}}, {{.75, .5}, {.45, .45}, {.25, .62}, {.45, .8}, {.75, .75}}};
  g[U'e'] = {{{.25, .62}, {.75, .62}, {.6, .45}, {.4, .45}, {.25, .62}, {.45, .8}, {.75, .77}}};
  g[U'f'] = {{{.7, .18}, {.5, .15}, {.4, .25}, {.4, .8}}, {{.25, .45}, {.65, .45}}};
  g[U'g'] = {{{.75, .45}, {.75, .9}, {.5, .97}, {.3, .9}}, {{.75, .5}, {.45, .45}, {.25, .6}, {.45, .75}, {.75, .7}}};
  g[U'h'] = {{{.25, .15}, {.25, .8}}, {{.25, .55}, {.5, .45}, {.75, .55}, {.75, .8}}};
  g[U'i'] = {{{.5, .45}, {.5, .8}}, {{.5, .27}, {.5, .32}}};
  g[U'j'] = {{{.55, .45}, {.55, .9}, {.35, .95}}, {{.55, .27}, {.55, .32}}};
  g[U'k'] = {{{.25, .15}, {.25, .8}}, {{.7, .42}, {.25, .62}, {.72, .8}}};
  g[U'l'] = {{{.45, .15}, {.45, .75}, {.6, .8}}};
  g[U'm'] = {{{.15, .8}, {.15, .45}}, {{.15, .52}, {.32, .45}, {.5, .52}, {.5, .8}}, {{.5, .52}, {.68, .45}, {.85, .52}, {.85, .8}}};
  g[U'n'] = {{{.25, .8}, {.25, .45}}, {{.25, .55}, {.5, .45}, {.75, .55}, {.75, .8}}};
  g[U'o'] = {{{.5, .45}, {.25, .62}, {.5, .8}, {.75, .62}, {.5, .45}}};
  g[U'p'] = {{{.25, .45}, {.25, .97}}, {{.25, .5}, {.55, .45}, {.75, .62}, {.55, .8}, {.25, .75}}};
  g[U'q'] = {{{.75, .45}, {.75, .97}}, {{.75, .5}, {.45, .45}, {.25, .62}, {.45, .8}, {.75, .75}}};
  g[U'r'] = {{{.3, .8}, {.3, .45}}, {{.3, .58}, {.5, .46}, {.72, .48}}};
  g[U's'] = {{{.72, .47}, {.4, .45}, {.28, .55}, {.7, .7}, {.6, .8}, {.25, .78}}};
  g[U't'] = {{{.45, .2}, {.45, .75}, {.65, .8}}, {{.25, .42}, {.68, .42}}};
  g[U'u'] = {{{.25, .45}, {.25, .7}, {.45, .8}, {.75, .7}}, {{.75, .45}, {.75, .8}}};
  g[U'v'] = {{{.22, .45}, {.5, .8}, {.78, .45}}};
  g[U'w'] = {{{.12, .45}, {.3, .8}, {.5, .55}, {.7, .8}, {.88, .45}}};
  g[U'x'] = {{{.25, .45}, {.75, .8}}, {{.75, .45}, {.25, .8}}};
  g[U'y'] = {{{.25, .45}, {.5, .75}}, {{.75, .45}, {.4, .97}}};
  g[U'z'] = {{{.25, .45}, {.75, .45}, {.25, .8}, {.75, .8}}};
  g[U'0'] = {{{.5, .15}, {.25, .35}, {.25, .6}, {.5, .8}, {.75, .6}, {.75, .35}, {.5, .15}}};
  g[U'1'] = {{{.35, .3}, {.55, .15}, {.55, .8}}};
  g[U'2'] = {{{.25, .3}, {.45, .15}, {.7, .22}, {.7, .4}, {.25, .8}, {.75, .8}}};
  g[U'3'] = {{{.25, .18}, {.7, .18}, {.45, .45}, {.72, .6}, {.55, .8}, {.25, .75}}};
  g[U'4'] = {{{.65, .8}, {.65, .15}, {.22, .6}, {.8, .6}}};
  g[U'5'] = {{{.72, .15}, {.3, .15}, {.27, .45}, {.6, .45}, {.72, .62}, {.55, .8}, {.25, .75}}};
  g[U'6'] = {{{.7, .18}, {.4, .25}, {.25, .6}, {.45, .8}, {.72, .65}, {.55, .47}, {.27, .55}}};
  g[U'7'] = {{{.25, .15}, {.75, .15}, {.4, .8}}};
  g[U'8'] = {{{.5, .47}, {.28, .3}, {.5, .15}, {.72, .3}, {.5, .47}, {.25, .65}, {.5, .8}, {.75, .65}, {.5, .47}}};
  g[U'9'] = {{{.72, .4}, {.5, .5}, {.28, .32}, {.5, .15}, {.72, .3}, {.72, .5}, {.55, .8}}};
  return f;
}

Image render_word(std::u32string_view text, const GlyphFont& font, std::size_t height, std::uint64_t seed) {
  if (text.empty()) throw DomainError("render_word: empty text");
  if (height < 4) throw DomainError("render_word: height too small");
  for (char32_t c : text) {
    if (!font.has(c)) throw ConfigError("render_word: font has no glyph for '" + text::utf8_encode(std::u32string(1, c)) + "'");
  }
  const std::size_t gw = glyph_width(height);
  const double H = static_cast<double>(height);
  Image img(height, gw * text.size());
  std::vector<double> ink(img.pixels.size(), 0.0);
  SplitMix64 rng(derive_seed(seed, 0, kJitterStream));
  const double shear = std::tan(font.slant_deg * std::numbers::pi / 180.0);
  const double base_thickness = H / 16.0 * font.thickness_scale;

  for (std::size_t gi = 0; gi < text.size(); ++gi) {
    const double x0 = static_cast<double>(gi * gw);
    const double shift_x = rng.uniform(-1.0, 1.0) * font.jitter;
    const double shift_y = rng.uniform(-1.0, 1.0) * font.jitter;
    const double half = 0.5 * base_thickness * rng.uniform(0.85, 1.15);
    for (const auto& line : font.glyphs.at(text[gi])) {
      // Map to pixel space with jitter and slant about the vertical centre.
      Polyline pts;
      for (const auto& p : line) {
        const double gx = p.x + shift_x + rng.uniform(-1.0, 1.0) * font.jitter;
        const double gy = p.y + shift_y + rng.uniform(-1.0, 1.0) * font.jitter;
        pts.push_back({x0 + gx * static_cast<double>(gw) + (0.5 - gy) * H * shear, gy * H});
      }
      for (std::size_t s = 0; s + 1 < std::max<std::size_t>(pts.size(), 2); ++s) {
        const Point a = pts[s], b = pts.size() > 1 ? pts[s + 1] : pts[s];
        const double pad = half + 1.0;
        const long ylo = std::max(0L, static_cast<long>(std::floor(std::min(a.y, b.y) - pad)));
        const long yhi = std::min(static_cast<long>(height) - 1, static_cast<long>(std::ceil(std::max(a.y, b.y) + pad)));
        const long xlo = std::max(0L, static_cast<long>(std::floor(std::min(a.x, b.x) - pad)));
        const long xhi = std::min(static_cast<long>(img.width) - 1, static_cast<long>(std::ceil(std::max(a.x, b.x) + pad)));
        for (long y = ylo; y <= yhi; ++y) {
          for (long x = xlo; x <= xhi; ++x) {
            const double d = segment_distance(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5, a, b);
            const double cov = std::clamp(half - d + 0.5, 0.0, 1.0);
            double& cell = ink[static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)];
            cell = std::max(cell, cov);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < ink.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - ink[i])));
  return img;
}

nlohmann::json font_style_to_json(const GlyphFont& font) {
  return {{"slant_deg", font.slant_deg}, {"thickness_scale", font.thickness_scale}, {"jitter", font.jitter}};
}

GlyphFont font_from_json(const nlohmann::json& j) {
  GlyphFont f = default_font();
  for (const auto& [key, value] : j.items()) {
    if (key == "slant_deg") {
      f.slant_deg = value.get<double>();
    } else if (key == "thickness_scale") {
      f.thickness_scale = value.get<double>();
    } else if (key == "jitter") {
      f.jitter = value.get<double>();
    } else {
      throw ConfigError("font." + key + ": unknown key");
    }
  }
  if (!(f.thickness_scale > 0.0)) throw ConfigError("font.thickness_scale: must be positive");
  if (f.jitter < 0.0) throw ConfigError("font.jitter: must be non-negative");
  return f;
}

}  // namespace amd::synth
