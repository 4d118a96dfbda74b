// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Core>
#include <limits>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;
using CVec = Eigen::Map<const Eigen::VectorXd>;

CMap cmap(std::span<const double> v, std::size_t rows, std::size_t cols) {
  return CMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MMap mmap(std::span<double> v, std::size_t rows, std::size_t cols) {
  return MMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  mmap(out, m, n).noalias() = cmap(a.values(), m, k) * cmap(b.values(), k, n);
  return Tensor::make_result({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const double> g) {
    auto G = cmap(g, m, n);
    if (a.requires_grad()) mmap(a.grad_accumulator(), m, k).noalias() += G * cmap(b.values(), k, n).transpose();
    if (b.requires_grad()) mmap(b.grad_accumulator(), k, n).noalias() += cmap(a.values(), m, k).transpose() * G;
  });
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.rank() != 2 || weight.rank() != 2 || bias.rank() != 1 || weight.dim(1) != input.dim(1) ||
      bias.dim(0) != weight.dim(0)) {
    throw ShapeError("linear shapes " + shape_str(input.shape()) + ", " + shape_str(weight.shape()) + ", " +
                     shape_str(bias.shape()));
  }
  const std::size_t rows = input.dim(0), fin = input.dim(1), fout = weight.dim(0);
  std::vector<double> out(rows * fout);
  auto O = mmap(out, rows, fout);
  O.noalias() = cmap(input.values(), rows, fin) * cmap(weight.values(), fout, fin).transpose();
  O.rowwise() += CVec(bias.values().data(), static_cast<Eigen::Index>(fout)).transpose();
  return Tensor::make_result(
      {rows, fout}, std::move(out), {input, weight, bias},
      [input, weight, bias, rows, fin, fout](std::span<const double> g) {
        auto G = cmap(g, rows, fout);
        if (input.requires_grad()) {
          mmap(input.grad_accumulator(), rows, fin).noalias() += G * cmap(weight.values(), fout, fin);
        }
        if (weight.requires_grad()) {
          mmap(weight.grad_accumulator(), fout, fin).noalias() += G.transpose() * cmap(input.values(), rows, fin);
        }
        if (bias.requires_grad()) {
          auto gb = bias.grad_accumulator();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < fout; ++o) gb[o] += g[r * fout + o];
          }
        }
      });
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  if (input.rank() != 4 || kernel.rank() != 4 || bias.rank() != 1) throw ShapeError("conv2d expects [B,C,H,W], [O,C,kh,kw], [O]");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t O = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
  if (kernel.dim(1) != C || bias.dim(0) != O) throw ShapeError("conv2d channel mismatch");
  if (stride == 0) throw ShapeError("conv2d stride must be positive");
  const std::size_t ph = H + 2 * padding, pw = W + 2 * padding;
  if (ph < KH || pw < KW || (ph - KH) % stride != 0 || (pw - KW) % stride != 0) {
    throw ShapeError("conv2d output extent is not integral for input " + shape_str(input.shape()));
  }
  const std::size_t Ho = (ph - KH) / stride + 1, Wo = (pw - KW) / stride + 1;
  const std::size_t P = Ho * Wo, R = C * KH * KW;

  // im2col over the whole batch: rows = C*kh*kw, cols = B*Ho*Wo.
  auto iv = input.values();
  auto cols = std::make_shared<std::vector<double>>(R * B * P, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ky = 0; ky < KH; ++ky) {
      for (std::size_t kx = 0; kx < KW; ++kx) {
        double* row = cols->data() + ((c * KH + ky) * KW + kx) * B * P;
        for (std::size_t b = 0; b < B; ++b) {
          const double* plane = iv.data() + (b * C + c) * H * W;
          for (std::size_t oy = 0; oy < Ho; ++oy) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t ox = 0; ox < Wo; ++ox) {
              const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
              if (x < 0 || x >= static_cast<std::ptrdiff_t>(W)) continue;
              row[b * P + oy * Wo + ox] = plane[static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x)];
            }
          }
        }
      }
    }
  }
  RowMat prod = cmap(kernel.values(), O, R) * cmap(*cols, R, B * P);
  std::vector<double> out(B * O * P);
  auto bv = bias.values();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < O; ++o) {
      double* dst = out.data() + (b * O + o) * P;
      const double* src = prod.data() + o * B * P + b * P;
      for (std::size_t p = 0; p < P; ++p) dst[p] = src[p] + bv[o];
    }
  }
  return Tensor::make_result(
      {B, O, Ho, Wo}, std::move(out), {input, kernel, bias},
      [=](std::span<const double> g) {
        // Gradient rearranged to [O, B*P] to match the im2col layout.
        RowMat G(static_cast<Eigen::Index>(O), static_cast<Eigen::Index>(B * P));
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t o = 0; o < O; ++o) {
            std::copy_n(g.data() + (b * O + o) * P, P, G.data() + o * B * P + b * P);
          }
        }
        if (bias.requires_grad()) {
          auto gb = bias.grad_accumulator();
          for (std::size_t o = 0; o < O; ++o) {
            double acc = 0.0;
            for (std::size_t j = 0; j < B * P; ++j) acc += G(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(j));
            gb[o] += acc;
          }
        }
        if (kernel.requires_grad()) {
          mmap(kernel.grad_accumulator(), O, R).noalias() += G * cmap(*cols, R, B * P).transpose();
        }
        if (input.requires_grad()) {
          RowMat dcols = cmap(kernel.values(), O, R).transpose() * G;
          auto gi = input.grad_accumulator();
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t ky = 0; ky < KH; ++ky) {
              for (std::size_t kx = 0; kx < KW; ++kx) {
                const double* row = dcols.data() + ((c * KH + ky) * KW + kx) * B * P;
                for (std::size_t b = 0; b < B; ++b) {
                  double* plane = gi.data() + (b * C + c) * H * W;
                  for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(H)) continue;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                      const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
                      if (x < 0 || x >= static_cast<std::ptrdiff_t>(W)) continue;
                      plane[static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x)] += row[b * P + oy * Wo + ox];
                    }
                  }
                }
              }
            }
          }
        }
      });
}

Tensor maxpool2(const Tensor& input) {
  if (input.rank() != 4) throw ShapeError("maxpool2 expects [B,C,H,W]");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (H % 2 != 0 || W % 2 != 0) throw ShapeError("maxpool2 needs even extents, got " + shape_str(input.shape()));
  const std::size_t Ho = H / 2, Wo = W / 2;
  auto iv = input.values();
  std::vector<double> out(B * C * Ho * Wo);
  std::vector<std::size_t> arg(out.size());
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    for (std::size_t y = 0; y < Ho; ++y) {
      for (std::size_t x = 0; x < Wo; ++x) {
        std::size_t best = bc * H * W + 2 * y * W + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t j = bc * H * W + (2 * y + dy) * W + 2 * x + dx;
            if (iv[j] > iv[best]) best = j;
          }
        }
        const std::size_t o = (bc * Ho + y) * Wo + x;
        out[o] = iv[best];
        arg[o] = best;
      }
    }
  }
  return Tensor::make_result({B, C, Ho, Wo}, std::move(out), {input},
                             [input, arg = std::move(arg)](std::span<const double> g) {
                               auto gi = input.grad_accumulator();
                               for (std::size_t o = 0; o < arg.size(); ++o) gi[arg[o]] += g[o];
                             });
}

}  // namespace amd::ad
