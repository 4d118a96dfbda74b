// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/synth/augment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "amd/errors.hpp"
#include "amd/rng.hpp"

namespace amd::synth {

namespace {

constexpr std::uint64_t kAugmentStream = 0xA6;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::vector<double> gaussian_kernel(double sigma, std::size_t size) {
  std::vector<double> k(size);
  const double c = static_cast<double>(size / 2);
  double s = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    s += k[i];
  }
  for (auto& v : k) v /= s;
  return k;
}

// Separable blur with edge replication.
void blur(std::vector<double>& v, std::size_t h, std::size_t w, double sigma, std::size_t size) {
  const auto k = gaussian_kernel(sigma, size);
  const long r = static_cast<long>(size / 2);
  std::vector<double> tmp(v.size());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long i = -r; i <= r; ++i) {
        const long xx = std::clamp(static_cast<long>(x) + i, 0L, static_cast<long>(w) - 1);
        s += k[static_cast<std::size_t>(i + r)] * v[y * w + static_cast<std::size_t>(xx)];
      }
      tmp[y * w + x] = s;
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long i = -r; i <= r; ++i) {
        const long yy = std::clamp(static_cast<long>(y) + i, 0L, static_cast<long>(h) - 1);
        s += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      v[y * w + x] = s;
    }
  }
}

// Output pixel (x, y) reads the source at map(x, y).
template <class Map>
FloatImage warp(const FloatImage& src, double fill, Map map) {
  FloatImage out{src.height, src.width, std::vector<double>(src.v.size())};
  for (std::size_t y = 0; y < src.height; ++y) {
    for (std::size_t x = 0; x < src.width; ++x) {
      auto [sx, sy] = map(static_cast<double>(x), static_cast<double>(y));
      out.at(y, x) = src.sample(sy, sx, fill);
    }
  }
  return out;
}

double background(const FloatImage& f) {
  std::vector<double> p = f.v;
  auto mid = p.begin() + static_cast<std::ptrdiff_t>(p.size() / 2);
  std::nth_element(p.begin(), mid, p.end());
  return *mid;
}

// Inverse of the centred map  p -> A (p - c) + c + t.
FloatImage affine_warp(const FloatImage& f, double fill, const Eigen::Matrix2d& A, double tx, double ty) {
  const Eigen::Matrix2d inv = A.inverse();
  const double cx = 0.5 * static_cast<double>(f.width - 1), cy = 0.5 * static_cast<double>(f.height - 1);
  return warp(f, fill, [&](double x, double y) {
    const Eigen::Vector2d q = inv * Eigen::Vector2d(x - cx - tx, y - cy - ty);
    return std::pair{q.x() + cx, q.y() + cy};
  });
}

// Homography taking the four `from` corners onto `to`.
Eigen::Matrix3d homography(const std::array<Eigen::Vector2d, 4>& from, const std::array<Eigen::Vector2d, 4>& to) {
  Eigen::Matrix<double, 8, 8> M;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = from[i].x(), y = from[i].y(), u = to[i].x(), v = to[i].y();
    M.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    M.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> h = M.colPivHouseholderQr().solve(b);
  Eigen::Matrix3d H;
  H << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return H;
}

void apply(FloatImage& f, const Transform& t, SplitMix64& rng) {
  const double fill = background(f);
  const double W = static_cast<double>(f.width), Hh = static_cast<double>(f.height);
  switch (t.kind) {
    case TransformKind::kElastic: {
      std::vector<double> dx(f.v.size()), dy(f.v.size());
      for (auto& d : dx) d = rng.uniform(-1.0, 1.0);
      for (auto& d : dy) d = rng.uniform(-1.0, 1.0);
      const std::size_t size = 2 * static_cast<std::size_t>(std::ceil(3.0 * t.smoothness)) + 1;
      blur(dx, f.height, f.width, t.smoothness, size);
      blur(dy, f.height, f.width, t.smoothness, size);
      const FloatImage src = f;
      f = warp(src, fill, [&](double x, double y) {
        const std::size_t i = static_cast<std::size_t>(y) * src.width + static_cast<std::size_t>(x);
        return std::pair{x + t.magnitude * dx[i], y + t.magnitude * dy[i]};
      });
      break;
    }
    case TransformKind::kRotation: {
      const double a = deg2rad(rng.uniform(-t.degrees, t.degrees));
      Eigen::Matrix2d R;
      R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      f = affine_warp(f, fill, R, 0.0, 0.0);
      break;
    }
    case TransformKind::kColorJitter: {
      const double b = rng.uniform(1.0 - t.brightness, 1.0 + t.brightness);
      const double c = rng.uniform(1.0 - t.contrast, 1.0 + t.contrast);
      double mean = 0.0;
      for (double& v : f.v) {
        v = std::clamp(v * b, 0.0, 255.0);
        mean += v;
      }
      mean /= static_cast<double>(f.v.size());
      for (double& v : f.v) v = std::clamp(mean + c * (v - mean), 0.0, 255.0);
      break;
    }
    case TransformKind::kGaussianBlur: {
      blur(f.v, f.height, f.width, rng.uniform(t.sigma_min, t.sigma_max), t.kernel);
      break;
    }
    case TransformKind::kErase: {
      const double area = W * Hh;
      for (int attempt = 0; attempt < 10; ++attempt) {
        const double target = area * rng.uniform(t.scale_min, t.scale_max);
        const double ratio = std::exp(rng.uniform(std::log(t.aspect_min), std::log(t.aspect_max)));
        const auto eh = static_cast<std::size_t>(std::lround(std::sqrt(target * ratio)));
        const auto ew = static_cast<std::size_t>(std::lround(std::sqrt(target / ratio)));
        if (eh == 0 || ew == 0 || eh >= f.height || ew >= f.width) continue;
        const std::size_t y0 = rng.below(f.height - eh + 1), x0 = rng.below(f.width - ew + 1);
        for (std::size_t y = y0; y < y0 + eh; ++y) {
          for (std::size_t x = x0; x < x0 + ew; ++x) f.at(y, x) = fill;
        }
        break;
      }
      break;
    }
    case TransformKind::kPerspective: {
      const double hw = 0.5 * W * t.distortion, hh = 0.5 * Hh * t.distortion;
      const double r = W - 1, b = Hh - 1;
      const std::array<Eigen::Vector2d, 4> start = {Eigen::Vector2d(0, 0), {r, 0}, {r, b}, {0, b}};
      const std::array<Eigen::Vector2d, 4> end = {
          Eigen::Vector2d(rng.uniform(0, hw), rng.uniform(0, hh)), {r - rng.uniform(0, hw), rng.uniform(0, hh)},
          {r - rng.uniform(0, hw), b - rng.uniform(0, hh)}, {rng.uniform(0, hw), b - rng.uniform(0, hh)}};
      const Eigen::Matrix3d Hinv = homography(end, start);
      f = warp(f, fill, [&](double x, double y) {
        const Eigen::Vector3d q = Hinv * Eigen::Vector3d(x, y, 1.0);
        return std::pair{q.x() / q.z(), q.y() / q.z()};
      });
      break;
    }
    case TransformKind::kAffine: {
      const double a = deg2rad(rng.uniform(-t.degrees, t.degrees));
      const double tx = rng.uniform(-t.translate, t.translate) * W;
      const double ty = rng.uniform(-t.translate, t.translate) * Hh;
      const double s = rng.uniform(t.scale_min, t.scale_max);
      const double shx = deg2rad(rng.uniform(-t.shear_x, t.shear_x));
      const double shy = deg2rad(rng.uniform(-t.shear_y, t.shear_y));
      Eigen::Matrix2d R, S;
      R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      S << 1.0, std::tan(shx), std::tan(shy), 1.0;
      f = affine_warp(f, fill, s * R * S, tx, ty);
      break;
    }
  }
}

const char* kind_name(TransformKind k) {
  switch (k) {
    case TransformKind::kElastic: return "elastic";
    case TransformKind::kRotation: return "rotation";
    case TransformKind::kColorJitter: return "color_jitter";
    case TransformKind::kGaussianBlur: return "gaussian_blur";
    case TransformKind::kErase: return "erase";
    case TransformKind::kPerspective: return "perspective";
    case TransformKind::kAffine: return "affine";
  }
  return "";
}

TransformKind kind_from(const std::string& s) {
  for (auto k : {TransformKind::kElastic, TransformKind::kRotation, TransformKind::kColorJitter,
                 TransformKind::kGaussianBlur, TransformKind::kErase, TransformKind::kPerspective,
                 TransformKind::kAffine}) {
    if (s == kind_name(k)) return k;
  }
  throw ConfigError("augmentation.kind: unknown transform '" + s + "'");
}

// Nearest odd size to a scaled kernel extent.
std::size_t odd_kernel(double k) { return 2 * static_cast<std::size_t>(std::max(0.0, std::round((k - 1.0) / 2.0))) + 1; }

}  // namespace

Image augment(const Image& img, const AugmentationPipeline& pipeline, std::uint64_t seed) {
  bool any = false;
  FloatImage f = to_float(img);
  for (std::size_t i = 0; i < pipeline.transforms.size(); ++i) {
    const Transform& t = pipeline.transforms[i];
    SplitMix64 rng(derive_seed(seed, i, kAugmentStream));
    if (!rng.bernoulli(t.probability)) continue;
    apply(f, t, rng);
    any = true;
  }
  return any ? quantize(f) : img;
}

AugmentationPipeline pretrain_pipeline(std::size_t height) {
  const double s = static_cast<double>(height) / 128.0;
  AugmentationPipeline p;
  Transform elastic{TransformKind::kElastic, 0.2};
  elastic.magnitude = 20.0 * s;
  elastic.smoothness = 4.0 * s;
  Transform rot{TransformKind::kRotation, 0.5};
  rot.degrees = 3.0;
  Transform jitter{TransformKind::kColorJitter, 0.2};
  jitter.brightness = 0.4;
  jitter.contrast = 0.4;
  Transform blur_t{TransformKind::kGaussianBlur, 0.2};
  blur_t.kernel = odd_kernel(23.0 * s);
  blur_t.sigma_min = 0.1 * s;
  blur_t.sigma_max = 2.0 * s;
  p.transforms = {elastic, rot, jitter, blur_t};
  p.ignored = {"color_jitter.saturation", "color_jitter.hue"};
  return p;
}

AugmentationPipeline synthetic_pipeline(std::size_t height) {
  const double s = static_cast<double>(height) / 128.0;
  AugmentationPipeline p;
  Transform elastic{TransformKind::kElastic, 0.2};
  elastic.magnitude = 20.0 * s;
  elastic.smoothness = 4.0 * s;
  Transform blur_t{TransformKind::kGaussianBlur, 0.2};
  blur_t.kernel = odd_kernel(23.0 * s);
  blur_t.sigma_min = 0.1 * s;
  blur_t.sigma_max = 2.0 * s;
  Transform erase{TransformKind::kErase, 0.2};
  Transform persp{TransformKind::kPerspective, 0.2};
  persp.distortion = 0.2;
  // Photometric distortion reduced to its grayscale brightness/contrast part.
  Transform photo{TransformKind::kColorJitter, 0.5};
  photo.brightness = 0.125;
  photo.contrast = 0.5;
  Transform affine{TransformKind::kAffine, 0.5};
  affine.degrees = 5.0;
  affine.translate = 0.05;
  affine.scale_min = 0.95;
  affine.scale_max = 1.05;
  affine.shear_x = 5.0;
  affine.shear_y = 1.5;
  p.transforms = {elastic, blur_t, erase, persp, photo, affine};
  p.ignored = {"photometric.saturation", "photometric.hue"};
  return p;
}

nlohmann::json to_json(const AugmentationPipeline& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : p.transforms) {
    nlohmann::json j = {{"kind", kind_name(t.kind)}, {"probability", t.probability}};
    switch (t.kind) {
      case TransformKind::kElastic: j["magnitude"] = t.magnitude; j["smoothness"] = t.smoothness; break;
      case TransformKind::kRotation: j["degrees"] = t.degrees; break;
      case TransformKind::kColorJitter: j["brightness"] = t.brightness; j["contrast"] = t.contrast; break;
      case TransformKind::kGaussianBlur:
        j["kernel"] = t.kernel;
        j["sigma_min"] = t.sigma_min;
        j["sigma_max"] = t.sigma_max;
        break;
      case TransformKind::kErase:
        j["scale_min"] = t.scale_min;
        j["scale_max"] = t.scale_max;
        j["aspect_min"] = t.aspect_min;
        j["aspect_max"] = t.aspect_max;
        break;
      case TransformKind::kPerspective: j["distortion"] = t.distortion; break;
      case TransformKind::kAffine:
        j["degrees"] = t.degrees;
        j["translate"] = t.translate;
        j["scale_min"] = t.scale_min;
        j["scale_max"] = t.scale_max;
        j["shear_x"] = t.shear_x;
        j["shear_y"] = t.shear_y;
        break;
    }
    arr.push_back(j);
  }
  return {{"transforms", arr}};
}

AugmentationPipeline pipeline_from_json(const nlohmann::json& j, std::size_t height) {
  if (!j.is_object()) throw ConfigError("augmentation: expected an object");
  if (j.contains("preset")) {
    if (j.size() != 1) throw ConfigError("augmentation: 'preset' cannot be combined with other keys");
    const auto name = j.at("preset").get<std::string>();
    if (name == "pretrain") return pretrain_pipeline(height);
    if (name == "synthetic") return synthetic_pipeline(height);
    if (name == "none") return {};
    throw ConfigError("augmentation.preset: unknown preset '" + name + "'");
  }
  AugmentationPipeline p;
  for (const auto& [key, value] : j.items()) {
    if (key != "transforms") throw ConfigError("augmentation." + key + ": unknown key");
  }
  if (!j.contains("transforms")) return p;
  std::size_t idx = 0;
  for (const auto& tj : j.at("transforms")) {
    const std::string where = "augmentation.transforms[" + std::to_string(idx++) + "]";
    if (!tj.contains("kind")) throw ConfigError(where + ".kind: missing");
    Transform t{kind_from(tj.at("kind").get<std::string>())};
    for (const auto& [key, value] : tj.items()) {
      if (key == "kind") continue;
      if (key == "probability") t.probability = value.get<double>();
      else if (key == "magnitude") t.magnitude = value.get<double>();
      else if (key == "smoothness") t.smoothness = value.get<double>();
      else if (key == "degrees") t.degrees = value.get<double>();
      else if (key == "brightness") t.brightness = value.get<double>();
      else if (key == "contrast") t.contrast = value.get<double>();
      else if (key == "kernel") t.kernel = value.get<std::size_t>();
      else if (key == "sigma_min") t.sigma_min = value.get<double>();
      else if (key == "sigma_max") t.sigma_max = value.get<double>();
      else if (key == "scale_min") t.scale_min = value.get<double>();
      else if (key == "scale_max") t.scale_max = value.get<double>();
      else if (key == "aspect_min") t.aspect_min = value.get<double>();
      else if (key == "aspect_max") t.aspect_max = value.get<double>();
      else if (key == "distortion") t.distortion = value.get<double>();
      else if (key == "translate") t.translate = value.get<double>();
      else if (key == "shear_x") t.shear_x = value.get<double>();
      else if (key == "shear_y") t.shear_y = value.get<double>();
      else if (key == "hue" || key == "saturation") p.ignored.push_back(where + "." + key);
      else throw ConfigError(where + "." + key + ": unknown key");
    }
    if (t.probability < 0.0 || t.probability > 1.0) throw ConfigError(where + ".probability: must lie in [0,1]");
    if (t.kind == TransformKind::kGaussianBlur && t.kernel % 2 == 0) throw ConfigError(where + ".kernel: must be odd");
    if (t.kind == TransformKind::kElastic && !(t.smoothness > 0.0)) throw ConfigError(where + ".smoothness: must be positive");
    p.transforms.push_back(t);
  }
  return p;
}

}  // namespace amd::synth
