// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::ad {

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw ShapeError("shapes " + shape_str(a) + " and " + shape_str(b) + " are not broadcast-compatible");
    }
    out[i] = std::max(ea, eb);
  }
  return out;
}

namespace {

// Flat offsets into an operand for every element of the broadcast output.
std::vector<std::size_t> broadcast_offsets(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > 0;) {
    const std::size_t k = in.size() + i;
    if (k < rank) break;
    const std::size_t e = in[k - rank];
    stride[i] = (e == 1) ? 0 : s;
    s *= e;
  }
  const std::size_t n = numel(out);
  std::vector<std::size_t> offsets(n);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t off = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    offsets[flat] = off;
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      off += stride[d];
      if (idx[d] < out[d]) break;
      off -= stride[d] * idx[d];
      idx[d] = 0;
    }
  }
  return offsets;
}

template <class Fwd, class DA, class DB>
Tensor binary(const Tensor& a, const Tensor& b, Fwd fwd, DA da, DB db) {
  Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const std::size_t n = numel(out_shape);
  const bool same_a = a.shape() == out_shape;
  const bool same_b = b.shape() == out_shape;
  auto oa = same_a ? std::vector<std::size_t>{} : broadcast_offsets(a.shape(), out_shape);
  auto ob = same_b ? std::vector<std::size_t>{} : broadcast_offsets(b.shape(), out_shape);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = fwd(av[same_a ? i : oa[i]], bv[same_b ? i : ob[i]]);
  }
  return Tensor::make_result(
      std::move(out_shape), std::move(out), {a, b},
      [a, b, oa = std::move(oa), ob = std::move(ob), same_a, same_b, da, db, n](std::span<const double> g) {
        auto av = a.values();
        auto bv = b.values();
        if (a.requires_grad()) {
          auto ga = a.grad_accumulator();
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ia = same_a ? i : oa[i];
            ga[ia] += g[i] * da(av[ia], bv[same_b ? i : ob[i]]);
          }
        }
        if (b.requires_grad()) {
          auto gb = b.grad_accumulator();
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ib = same_b ? i : ob[i];
            gb[ib] += g[i] * db(av[same_a ? i : oa[i]], bv[ib]);
          }
        }
      });
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return Tensor::make_result(a.shape(), std::move(out), {a}, [a, deriv](std::span<const double> g) {
    auto av = a.values();
    auto ga = a.grad_accumulator();
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g[i] * deriv(av[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.values()) {
    if (v == 0.0) throw DomainError("division by zero");
  }
  return binary(
      a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor exp(const Tensor& a) {
  // d/dx e^x recomputed from the input keeps the closure free of the output.
  return unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
  for (double v : a.values()) {
    if (!(v > 0.0)) throw DomainError("log of a non-positive value; clamp_min the argument first");
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x) { return x > 0.0 ? 1.0 : slope; });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary(
      a, [floor](double x) { return x > floor ? x : floor; },
      [floor](double x) { return x > floor ? 1.0 : 0.0; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double) { return factor; });
}

}  // namespace amd::ad
