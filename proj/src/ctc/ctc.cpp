// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/ctc/ctc.hpp"

#include <cmath>
#include <limits>

#include "amd/errors.hpp"

namespace amd::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

struct SampleResult {
  double nll = 0.0;
  std::vector<double> grad;  // d nll / d log_probs over [K, C]
};

// lp points at the [K_total, C] block of one sample; only the first T frames
// take part.
SampleResult run_sample(const double* lp, std::size_t T, std::size_t C, const Labels& target) {
  const std::size_t S = 2 * target.size() + 1;
  auto label = [&](std::size_t s) { return s % 2 == 0 ? 0 : target[s / 2]; };
  auto skip_ok = [&](std::size_t s) { return s >= 2 && s % 2 == 1 && label(s) != label(s - 2); };

  std::vector<double> alpha(T * S, kNegInf), beta(T * S, kNegInf);
  alpha[0] = lp[0];
  if (S > 1) alpha[1] = lp[label(1)];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[(t - 1) * S + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * S + s - 1]);
      if (skip_ok(s)) a = log_add(a, alpha[(t - 1) * S + s - 2]);
      if (a != kNegInf) alpha[t * S + s] = a + lp[t * C + label(s)];
    }
  }
  beta[(T - 1) * S + S - 1] = lp[(T - 1) * C + label(S - 1)];
  if (S > 1) beta[(T - 1) * S + S - 2] = lp[(T - 1) * C + label(S - 2)];
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta[(t + 1) * S + s];
      if (s + 1 < S) b = log_add(b, beta[(t + 1) * S + s + 1]);
      if (s + 2 < S && skip_ok(s + 2)) b = log_add(b, beta[(t + 1) * S + s + 2]);
      if (b != kNegInf) beta[t * S + s] = b + lp[t * C + label(s)];
    }
  }
  double log_p = alpha[(T - 1) * S + S - 1];
  if (S > 1) log_p = log_add(log_p, alpha[(T - 1) * S + S - 2]);
  if (!std::isfinite(log_p)) throw InfeasibleTargetError("CTC target has zero probability under the given frames");

  SampleResult res;
  res.nll = -log_p;
  res.grad.assign(T * C, 0.0);
  std::vector<double> occ(C);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occ.begin(), occ.end(), kNegInf);
    for (std::size_t s = 0; s < S; ++s) {
      const double ab = alpha[t * S + s] + beta[t * S + s];
      if (ab != kNegInf) occ[label(s)] = log_add(occ[label(s)], ab);
    }
    for (std::size_t c = 0; c < C; ++c) {
      // alpha and beta both include the emission at t, hence one extra term.
      if (occ[c] != kNegInf) res.grad[t * C + c] = -std::exp(occ[c] - lp[t * C + c] - log_p);
    }
  }
  return res;
}

}  // namespace

std::size_t min_frames(const Labels& target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) n += target[i] == target[i - 1] ? 1 : 0;
  return n;
}

ad::Tensor ctc_loss(const ad::Tensor& log_probs, std::span<const std::size_t> lengths,
                    const std::vector<Labels>& targets) {
  if (log_probs.rank() != 3) throw ShapeError("ctc_loss expects log-probabilities of shape [B,K,C]");
  const std::size_t B = log_probs.dim(0), K = log_probs.dim(1), C = log_probs.dim(2);
  if (targets.size() != B) throw ShapeError("ctc_loss needs one target per sample");
  if (!lengths.empty() && lengths.size() != B) throw ShapeError("ctc_loss needs one length per sample");
  auto lp = log_probs.values();
  std::vector<double> grad(B * K * C, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t T = lengths.empty() ? K : lengths[b];
    if (T == 0 || T > K) throw ShapeError("ctc_loss sample length out of range");
    for (int c : targets[b]) {
      if (c <= 0 || static_cast<std::size_t>(c) >= C) throw DomainError("ctc_loss target class out of range");
    }
    if (min_frames(targets[b]) > T) {
      throw InfeasibleTargetError("target of sample " + std::to_string(b) + " needs " +
                                  std::to_string(min_frames(targets[b])) + " frames but only " + std::to_string(T) +
                                  " are available");
    }
    auto r = run_sample(lp.data() + b * K * C, T, C, targets[b]);
    total += r.nll;
    std::copy(r.grad.begin(), r.grad.end(), grad.begin() + static_cast<std::ptrdiff_t>(b * K * C));
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  for (auto& g : grad) g *= inv_b;
  return ad::Tensor::make_result({1}, {total * inv_b}, {log_probs},
                                 [log_probs, grad = std::move(grad)](std::span<const double> g) {
                                   auto gx = log_probs.grad_accumulator();
                                   for (std::size_t i = 0; i < grad.size(); ++i) gx[i] += g[0] * grad[i];
                                 });
}

Path greedy_path(std::span<const double> frames, std::size_t length, std::size_t classes) {
  Path path(length);
  for (std::size_t k = 0; k < length; ++k) {
    const double* row = frames.data() + k * classes;
    int best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (row[c] > row[best]) best = static_cast<int>(c);
    }
    path[k] = best;
  }
  return path;
}

std::vector<Path> greedy_decode(const model::FrameDistributions& y) {
  const std::size_t B = y.batch(), K = y.frames(), C = y.classes();
  auto p = y.probs.values();
  std::vector<Path> out;
  out.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t len = y.lengths.empty() ? K : y.lengths[b];
    out.push_back(greedy_path(p.subspan(b * K * C, K * C), len, C));
  }
  return out;
}

Labels collapse(const Path& path) {
  Labels out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0 && path[i] == path[i - 1]) continue;
    if (path[i] != 0) out.push_back(path[i]);
  }
  return out;
}

}  // namespace amd::ctc
