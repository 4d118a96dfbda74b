// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/synth/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "amd/errors.hpp"

namespace amd::synth {

double FloatImage::sample(double y, double x, double fill) const {
  const double fy = std::floor(y), fx = std::floor(x);
  const double ty = y - fy, tx = x - fx;
  const auto iy = static_cast<long>(fy), ix = static_cast<long>(fx);
  auto px = [&](long r, long c) {
    if (r < 0 || c < 0 || r >= static_cast<long>(height) || c >= static_cast<long>(width)) return fill;
    return v[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)];
  };
  return (1 - ty) * ((1 - tx) * px(iy, ix) + tx * px(iy, ix + 1)) + ty * ((1 - tx) * px(iy + 1, ix) + tx * px(iy + 1, ix + 1));
}

FloatImage to_float(const Image& img) {
  FloatImage f{img.height, img.width, std::vector<double>(img.pixels.size())};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) f.v[i] = img.pixels[i];
  return f;
}

Image quantize(const FloatImage& f) {
  Image img(f.height, f.width);
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(f.v[i]), 0L, 255L));
  }
  return img;
}

std::uint8_t median_level(const Image& img) {
  if (img.pixels.empty()) return 255;
  std::vector<std::uint8_t> p = img.pixels;
  auto mid = p.begin() + static_cast<std::ptrdiff_t>(p.size() / 2);
  std::nth_element(p.begin(), mid, p.end());
  return *mid;
}

Image resize_to_height(const Image& img, std::size_t height) {
  if (img.height == height) return img;
  if (img.height == 0 || img.width == 0 || height == 0) throw DomainError("cannot resize an empty image");
  const double s = static_cast<double>(height) / static_cast<double>(img.height);
  const auto width = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(img.width) * s)));
  const FloatImage src = to_float(img);
  FloatImage out{height, width, std::vector<double>(height * width)};
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  for (std::size_t y = 0; y < height; ++y) {
    const double yy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    for (std::size_t x = 0; x < width; ++x) {
      const double xx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      out.at(y, x) = src.sample(yy, xx, 255.0);
    }
  }
  return quantize(out);
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("failed writing image " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P5") throw IoError(path.string() + ": not a binary PGM file");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (w == 0 || h == 0 || maxval != 255) throw IoError(path.string() + ": unsupported PGM geometry or depth");
  Image img(h, w);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw IoError(path.string() + ": truncated PGM data");
  return img;
}

}  // namespace amd::synth
