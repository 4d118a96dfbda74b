// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Core>
#include <cmath>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

CMap cmap(const double* p, std::size_t rows, std::size_t cols) {
  return CMap(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MMap mmap(double* p, std::size_t rows, std::size_t cols) {
  return MMap(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one time step for the whole batch, kept for backprop.
struct Step {
  RowMat h_prev;  // [B,H]
  RowMat r, z, n;  // [B,H]
  RowMat hn;       // W_hn h + b_hn, [B,H]
};

}  // namespace

Tensor gru(const Tensor& x, std::span<const std::size_t> lengths, const Tensor& w_ih, const Tensor& w_hh,
           const Tensor& b_ih, const Tensor& b_hh, bool reverse) {
  if (x.rank() != 3) throw ShapeError("gru expects x of shape [B,K,F]");
  const std::size_t B = x.dim(0), K = x.dim(1), F = x.dim(2);
  if (w_ih.rank() != 2 || w_ih.dim(1) != F || w_ih.dim(0) % 3 != 0) throw ShapeError("gru w_ih must be [3H,F]");
  const std::size_t H = w_ih.dim(0) / 3;
  if (H == 0) throw ShapeError("gru hidden size must be positive");
  if (w_hh.rank() != 2 || w_hh.dim(0) != 3 * H || w_hh.dim(1) != H) throw ShapeError("gru w_hh must be [3H,H]");
  if (b_ih.rank() != 1 || b_ih.dim(0) != 3 * H || b_hh.rank() != 1 || b_hh.dim(0) != 3 * H) {
    throw ShapeError("gru biases must be [3H]");
  }
  std::vector<std::size_t> len(B, K);
  if (!lengths.empty()) {
    if (lengths.size() != B) throw ShapeError("gru needs one length per sample");
    for (std::size_t b = 0; b < B; ++b) {
      if (lengths[b] > K) throw ShapeError("gru sample length exceeds frame count");
      len[b] = lengths[b];
    }
  }

  // Input projections for every frame at once: [B*K, 3H].
  auto xp = std::make_shared<RowMat>(cmap(x.values().data(), B * K, F) * cmap(w_ih.values().data(), 3 * H, F).transpose());
  {
    auto bi = b_ih.values();
    for (Eigen::Index r = 0; r < xp->rows(); ++r) {
      for (std::size_t j = 0; j < 3 * H; ++j) (*xp)(r, static_cast<Eigen::Index>(j)) += bi[j];
    }
  }
  auto frame_of = [len, reverse](std::size_t b, std::size_t t) { return reverse ? len[b] - 1 - t : t; };

  auto steps = std::make_shared<std::vector<Step>>();
  steps->reserve(K);
  RowMat h = RowMat::Zero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(H));
  std::vector<double> out(B * K * H, 0.0);
  auto bh = b_hh.values();
  const auto Whh = cmap(w_hh.values().data(), 3 * H, H);
  for (std::size_t t = 0; t < K; ++t) {
    Step st;
    st.h_prev = h;
    RowMat hp = h * Whh.transpose();
    st.r.setZero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(H));
    st.z = st.r;
    st.n = st.r;
    st.hn = st.r;
    for (std::size_t b = 0; b < B; ++b) {
      if (t >= len[b]) continue;
      const std::size_t k = frame_of(b, t);
      const auto bi = static_cast<Eigen::Index>(b);
      const double* xrow = xp->data() + (b * K + k) * 3 * H;
      for (std::size_t j = 0; j < H; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double hr = hp(bi, jj) + bh[j];
        const double hz = hp(bi, static_cast<Eigen::Index>(H + j)) + bh[H + j];
        const double hn = hp(bi, static_cast<Eigen::Index>(2 * H + j)) + bh[2 * H + j];
        const double r = sigmoid(xrow[j] + hr);
        const double z = sigmoid(xrow[H + j] + hz);
        const double n = std::tanh(xrow[2 * H + j] + r * hn);
        st.r(bi, jj) = r;
        st.z(bi, jj) = z;
        st.n(bi, jj) = n;
        st.hn(bi, jj) = hn;
        const double hnew = (1.0 - z) * n + z * h(bi, jj);
        h(bi, jj) = hnew;
        out[(b * K + k) * H + j] = hnew;
      }
    }
    steps->push_back(std::move(st));
  }

  return Tensor::make_result(
      {B, K, H}, std::move(out), {x, w_ih, w_hh, b_ih, b_hh},
      [=](std::span<const double> g) {
        RowMat dxp = RowMat::Zero(static_cast<Eigen::Index>(B * K), static_cast<Eigen::Index>(3 * H));
        RowMat dh = RowMat::Zero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(H));
        RowMat dhp(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(3 * H));
        RowMat dWhh = RowMat::Zero(static_cast<Eigen::Index>(3 * H), static_cast<Eigen::Index>(H));
        std::vector<double> dbhh(3 * H, 0.0);
        const auto Whh = cmap(w_hh.values().data(), 3 * H, H);
        for (std::size_t t = K; t-- > 0;) {
          const Step& st = (*steps)[t];
          dhp.setZero();
          RowMat dh_prev = dh;  // inactive samples carry the gradient through
          for (std::size_t b = 0; b < B; ++b) {
            if (t >= len[b]) continue;
            const std::size_t k = frame_of(b, t);
            const auto bi = static_cast<Eigen::Index>(b);
            double* dxrow = dxp.data() + (b * K + k) * 3 * H;
            for (std::size_t j = 0; j < H; ++j) {
              const auto jj = static_cast<Eigen::Index>(j);
              const double d = dh(bi, jj) + g[(b * K + k) * H + j];
              const double r = st.r(bi, jj), z = st.z(bi, jj), n = st.n(bi, jj), hn = st.hn(bi, jj);
              const double hprev = st.h_prev(bi, jj);
              const double dn = d * (1.0 - z);
              const double dz = d * (hprev - n);
              const double dan = dn * (1.0 - n * n);
              const double dr = dan * hn;
              const double dar = dr * r * (1.0 - r);
              const double daz = dz * z * (1.0 - z);
              dxrow[j] = dar;
              dxrow[H + j] = daz;
              dxrow[2 * H + j] = dan;
              dhp(bi, jj) = dar;
              dhp(bi, static_cast<Eigen::Index>(H + j)) = daz;
              dhp(bi, static_cast<Eigen::Index>(2 * H + j)) = dan * r;
              dh_prev(bi, jj) = d * z;
            }
          }
          dh_prev.noalias() += dhp * Whh;
          dWhh.noalias() += dhp.transpose() * st.h_prev;
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t j = 0; j < 3 * H; ++j) dbhh[j] += dhp(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
          }
          dh = std::move(dh_prev);
        }
        if (w_hh.requires_grad()) mmap(w_hh.grad_accumulator().data(), 3 * H, H) += dWhh;
        if (b_hh.requires_grad()) {
          auto gb = b_hh.grad_accumulator();
          for (std::size_t j = 0; j < 3 * H; ++j) gb[j] += dbhh[j];
        }
        if (b_ih.requires_grad()) {
          auto gb = b_ih.grad_accumulator();
          for (Eigen::Index r = 0; r < dxp.rows(); ++r) {
            for (std::size_t j = 0; j < 3 * H; ++j) gb[j] += dxp(r, static_cast<Eigen::Index>(j));
          }
        }
        if (w_ih.requires_grad()) {
          mmap(w_ih.grad_accumulator().data(), 3 * H, F).noalias() += dxp.transpose() * cmap(x.values().data(), B * K, F);
        }
        if (x.requires_grad()) {
          mmap(x.grad_accumulator().data(), B * K, F).noalias() += dxp * cmap(w_ih.values().data(), 3 * H, F);
        }
      });
}

}  // namespace amd::ad
