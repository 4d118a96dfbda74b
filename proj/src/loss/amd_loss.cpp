// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/loss/amd_loss.hpp"

#include <cmath>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::loss {

namespace {

// [B,K,1] indicator of valid frames.
ad::Tensor frame_mask(const model::FrameDistributions& y, std::size_t* valid_frames) {
  const std::size_t B = y.batch(), K = y.frames();
  std::vector<double> m(B * K, 0.0);
  std::size_t n = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t len = y.lengths.empty() ? K : std::min(y.lengths[b], K);
    for (std::size_t k = 0; k < len; ++k) m[b * K + k] = 1.0;
    n += len;
  }
  if (valid_frames) *valid_frames = n;
  return ad::Tensor::from({B, K, 1}, std::move(m));
}

ad::Tensor plogp_sum(const ad::Tensor& p, double eps_p) { return ad::sum(ad::mul(p, ad::log(ad::clamp_min(p, eps_p)))); }

}  // namespace

void AmdWeights::validate() const {
  if (align < 0.0 || minimize < 0.0 || diversify < 0.0) throw ConfigError("loss weights must be non-negative");
  if (!(eps_p > 0.0 && eps_p < 1.0)) throw ConfigError("eps_p must lie in (0, 1)");
}

SourceStats extract_source_stats(const model::Recognizer& model, const std::set<std::size_t>& layers) {
  SourceStats out;
  const auto& bns = model.bn_layers();
  for (auto id : layers) {
    if (id >= bns.size()) throw ConfigError("no BN layer with id " + std::to_string(id));
    if (!bns[id].populated) throw ContractError("BN layer " + std::to_string(id) + " holds no source statistics");
    out[id] = {bns[id].running_mean, bns[id].running_var};
  }
  return out;
}

AlignResult align_loss(const std::vector<model::LayerBatchStats>& batch_stats, const SourceStats& source,
                       double variance_floor) {
  if (batch_stats.size() != source.size()) throw ConfigError("align_loss layer sets differ");
  AlignResult res;
  std::vector<ad::Tensor> terms;
  for (const auto& bs : batch_stats) {
    auto it = source.find(bs.layer_id);
    if (it == source.end()) throw ConfigError("align_loss: no source statistics for layer " + std::to_string(bs.layer_id));
    const std::size_t F = bs.mean.numel();
    if (it->second.mean.size() != F || it->second.var.size() != F || bs.var.numel() != F) {
      throw ShapeError("align_loss channel count mismatch in layer " + std::to_string(bs.layer_id));
    }
    std::vector<double> src_var(F), log_src_var(F);
    for (std::size_t i = 0; i < F; ++i) {
      src_var[i] = it->second.var[i] + variance_floor;
      if (!(src_var[i] > 0.0)) throw DomainError("source variance must be positive");
      log_src_var[i] = std::log(src_var[i]);
    }
    auto mu_s = ad::Tensor::from({F}, it->second.mean);
    auto var_s = ad::Tensor::from({F}, src_var);
    auto var_b = variance_floor == 0.0 ? bs.var : ad::add(bs.var, ad::Tensor::scalar(variance_floor));
    auto d = ad::sub(bs.mean, mu_s);
    // 0.5*log(var_s) - 0.5*log(var_b) + (var_b + d^2) / (2 var_s) - 0.5
    auto kl = ad::add(ad::scale(ad::sub(ad::Tensor::from({F}, log_src_var), ad::log(var_b)), 0.5),
                      ad::div(ad::add(var_b, ad::mul(d, d)), ad::scale(var_s, 2.0)));
    auto layer = ad::sub(ad::mean(kl), ad::Tensor::scalar(0.5));
    res.per_layer[bs.layer_id] = layer.item();
    terms.push_back(layer);
  }
  if (terms.empty()) {
    res.total = ad::Tensor::scalar(0.0);
    return res;
  }
  res.total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) res.total = ad::add(res.total, terms[i]);
  return res;
}

ad::Tensor minimize_loss(const model::FrameDistributions& y, double eps_p) {
  std::size_t n = 0;
  auto mask = frame_mask(y, &n);
  const double norm = static_cast<double>(n * y.classes());
  return ad::scale(plogp_sum(ad::mul(y.probs, mask), eps_p), -1.0 / norm);
}

ad::Tensor diversify_loss(const model::FrameDistributions& y, double eps_p, DiversifyForm form) {
  if (form == DiversifyForm::kLiteral) return ad::scale(minimize_loss(y, eps_p), -1.0);
  const std::size_t B = y.batch(), K = y.frames(), C = y.classes();
  auto mask = frame_mask(y, nullptr);
  std::vector<double> inv_count(K, 0.0);
  std::size_t active = 0;
  for (std::size_t k = 0; k < K; ++k) {
    double c = 0.0;
    for (std::size_t b = 0; b < B; ++b) c += mask.at(b * K + k);
    if (c > 0.0) {
      inv_count[k] = 1.0 / c;
      ++active;
    }
  }
  std::vector<double> on(K);
  for (std::size_t k = 0; k < K; ++k) on[k] = inv_count[k] > 0.0 ? 1.0 : 0.0;
  auto inv = ad::Tensor::from({K, 1}, std::move(inv_count));
  ad::Tensor avg;
  if (form == DiversifyForm::kAveragedProbs) {
    avg = ad::mul(ad::sum(ad::mul(y.probs, mask), {0}), inv);
  } else {
    auto mean_lp = ad::mul(ad::sum(ad::mul(y.log_probs, mask), {0}), inv);
    avg = ad::mul(ad::softmax(mean_lp, 1), ad::Tensor::from({K, 1}, std::move(on)));
  }
  return ad::scale(plogp_sum(avg, eps_p), 1.0 / static_cast<double>(active * C));
}

AmdLossReport amd_loss(const model::ForwardResult& forward, const SourceStats& source, const AmdWeights& weights,
                       double variance_floor, DiversifyForm form) {
  weights.validate();
  if (weights.align > 0.0 && source.empty()) throw ConfigError("align weight is positive but no BN layer is selected");
  auto a = align_loss(forward.batch_stats, source, variance_floor);
  auto m = minimize_loss(forward.frames, weights.eps_p);
  auto d = diversify_loss(forward.frames, weights.eps_p, form);
  AmdLossReport r;
  r.align = a.total.item();
  r.minimize = m.item();
  r.diversify = d.item();
  r.align_per_layer = a.per_layer;
  r.total = ad::add(ad::add(ad::scale(a.total, weights.align), ad::scale(m, weights.minimize)),
                    ad::scale(d, weights.diversify));
  r.value = r.total.item();
  return r;
}

}  // namespace amd::loss
