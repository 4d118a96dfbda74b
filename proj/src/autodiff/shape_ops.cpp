// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::ad {

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.numel()) {
    throw ShapeError("cannot reshape " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return Tensor::make_result(std::move(shape), std::move(out), {a}, [a](std::span<const double> g) {
    auto ga = a.grad_accumulator();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& axes) {
  const auto& in = a.shape();
  const std::size_t rank = in.size();
  if (axes.size() != rank) throw ShapeError("permute needs one axis per dimension");
  std::vector<bool> seen(rank, false);
  for (auto ax : axes) {
    if (ax >= rank || seen[ax]) throw ShapeError("permute axes must be a permutation");
    seen[ax] = true;
  }
  std::vector<std::size_t> in_stride(rank, 1);
  for (std::size_t d = rank - 1; d-- > 0;) in_stride[d] = in_stride[d + 1] * in[d + 1];
  Shape out_shape(rank);
  std::vector<std::size_t> src_stride(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    out_shape[d] = in[axes[d]];
    src_stride[d] = in_stride[axes[d]];
  }
  const std::size_t n = a.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    src[flat] = off;
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      off += src_stride[d];
      if (idx[d] < out_shape[d]) break;
      off -= src_stride[d] * idx[d];
      idx[d] = 0;
    }
  }
  auto av = a.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = av[src[i]];
  return Tensor::make_result(std::move(out_shape), std::move(out), {a},
                             [a, src = std::move(src)](std::span<const double> g) {
                               auto ga = a.grad_accumulator();
                               for (std::size_t i = 0; i < g.size(); ++i) ga[src[i]] += g[i];
                             });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) throw ShapeError("concat rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) throw ShapeError("concat extent mismatch off the concat axis");
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_row = out_shape[axis] * inner;
  std::vector<double> out(numel(out_shape));
  std::size_t col = 0;
  std::vector<std::size_t> starts;
  for (const auto& p : parts) {
    starts.push_back(col);
    const std::size_t row = p.shape()[axis] * inner;
    auto pv = p.values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(o * row), row,
                  out.begin() + static_cast<std::ptrdiff_t>(o * out_row + col));
    }
    col += row;
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), parts,
                             [parts, starts, outer, inner, out_row, axis](std::span<const double> g) {
                               for (std::size_t k = 0; k < parts.size(); ++k) {
                                 if (!parts[k].requires_grad()) continue;
                                 auto gp = parts[k].grad_accumulator();
                                 const std::size_t row = parts[k].shape()[axis] * inner;
                                 for (std::size_t o = 0; o < outer; ++o) {
                                   for (std::size_t j = 0; j < row; ++j) {
                                     gp[o * row + j] += g[o * out_row + starts[k] + j];
                                   }
                                 }
                               }
                             });
}

Tensor reduce(Reduce kind, const Tensor& a, const std::vector<std::size_t>& axes) {
  const auto& in = a.shape();
  const std::size_t rank = in.size();
  std::vector<bool> reduced(rank, axes.empty());
  for (auto ax : axes) {
    if (ax >= rank) throw ShapeError("reduce axis out of range");
    reduced[ax] = true;
  }
  Shape out_shape;
  for (std::size_t d = 0; d < rank; ++d) {
    if (!reduced[d]) out_shape.push_back(in[d]);
  }
  if (out_shape.empty()) out_shape.push_back(1);

  // Output stride contribution of every input dimension (0 when reduced).
  std::vector<std::size_t> ostride(rank, 0);
  std::size_t s = 1;
  for (std::size_t d = rank; d-- > 0;) {
    if (!reduced[d]) {
      ostride[d] = s;
      s *= in[d];
    }
  }
  const std::size_t n = a.numel();
  std::vector<std::size_t> dst(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    dst[flat] = off;
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      off += ostride[d];
      if (idx[d] < in[d]) break;
      off -= ostride[d] * idx[d];
      idx[d] = 0;
    }
  }
  const std::size_t m = numel(out_shape);
  const double factor = kind == Reduce::kMean ? static_cast<double>(m) / static_cast<double>(n) : 1.0;
  auto av = a.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[dst[i]] += av[i];
  if (kind == Reduce::kMean) {
    for (auto& v : out) v *= factor;
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), {a},
                             [a, dst = std::move(dst), factor](std::span<const double> g) {
                               auto ga = a.grad_accumulator();
                               for (std::size_t i = 0; i < dst.size(); ++i) ga[i] += g[dst[i]] * factor;
                             });
}

namespace {

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw ShapeError("invalid axis " + std::to_string(axis) + " for shape " + shape_str(shape));
  AxisSplit s;
  for (std::size_t d = 0; d < axis; ++d) s.outer *= shape[d];
  s.extent = shape[axis];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) s.inner *= shape[d];
  return s;
}

}  // namespace

Tensor softmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis);
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.extent; ++k) mx = std::max(mx, av[base + k * s.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) {
        const double e = std::exp(av[base + k * s.inner] - mx);
        out[base + k * s.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < s.extent; ++k) out[base + k * s.inner] /= z;
    }
  }
  std::vector<double> y = out;
  return Tensor::make_result(a.shape(), std::move(out), {a}, [a, s, y = std::move(y)](std::span<const double> g) {
    auto ga = a.grad_accumulator();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.extent * s.inner + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < s.extent; ++k) dot += g[base + k * s.inner] * y[base + k * s.inner];
        for (std::size_t k = 0; k < s.extent; ++k) {
          const std::size_t j = base + k * s.inner;
          ga[j] += y[j] * (g[j] - dot);
        }
      }
    }
  });
}

Tensor log_softmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis);
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.extent; ++k) mx = std::max(mx, av[base + k * s.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) z += std::exp(av[base + k * s.inner] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t k = 0; k < s.extent; ++k) out[base + k * s.inner] = av[base + k * s.inner] - lse;
    }
  }
  std::vector<double> ls = out;
  return Tensor::make_result(a.shape(), std::move(out), {a}, [a, s, ls = std::move(ls)](std::span<const double> g) {
    auto ga = a.grad_accumulator();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.extent * s.inner + i;
        double gsum = 0.0;
        for (std::size_t k = 0; k < s.extent; ++k) gsum += g[base + k * s.inner];
        for (std::size_t k = 0; k < s.extent; ++k) {
          const std::size_t j = base + k * s.inner;
          ga[j] += g[j] - std::exp(ls[j]) * gsum;
        }
      }
    }
  });
}

}  // namespace amd::ad
