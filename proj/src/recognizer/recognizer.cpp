// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/recognizer/recognizer.hpp"

#include <algorithm>
#include <cmath>

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"
#include "amd/rng.hpp"

namespace amd::model {

namespace {

ad::Tensor uniform_init(SplitMix64& rng, ad::Shape shape, std::size_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

ad::Tensor activate(const ad::Tensor& x, Activation a, double slope) {
  switch (a) {
    case Activation::kLeakyRelu: return ad::leaky_relu(x, slope);
    case Activation::kRelu: return ad::relu(x);
    case Activation::kNone: return x;
  }
  return x;
}

}  // namespace

Recognizer::Recognizer(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  SplitMix64 rng(derive_seed(init_seed, 0, 0x1417));
  std::size_t in_channels = 1;
  std::size_t bn_id = 0;
  const std::size_t n = config_.blocks.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& blk = config_.blocks[i];
    const std::size_t fan_in = in_channels * 9;
    const std::string prefix = "conv" + std::to_string(i);
    params_.push_back({prefix + ".weight", uniform_init(rng, {blk.channels, in_channels, 3, 3}, fan_in), 2 * i,
                       ParamKind::kConvWeight, std::nullopt});
    params_.push_back({prefix + ".bias", uniform_init(rng, {blk.channels}, fan_in), 2 * i, ParamKind::kConvBias,
                       std::nullopt});
    if (blk.batch_norm) {
      bn_.emplace_back(bn_id, blk.channels, config_.bn_eps, config_.bn_momentum);
      block_bn_.push_back(bn_.size() - 1);
      bn_id++;
    } else {
      block_bn_.push_back(std::nullopt);
    }
    in_channels = blk.channels;
  }
  // Registered after the vector stops growing so the shared tensor handles
  // stay tied to the layer objects.
  for (auto& layer : bn_) {
    const std::size_t depth = 2 * config_.block_of_bn(layer.id()) + 1;
    layer.gamma.set_requires_grad(true);
    layer.beta.set_requires_grad(true);
    params_.push_back({"bn" + std::to_string(layer.id()) + ".gamma", layer.gamma, depth, ParamKind::kBnGamma, layer.id()});
    params_.push_back({"bn" + std::to_string(layer.id()) + ".beta", layer.beta, depth, ParamKind::kBnBeta, layer.id()});
  }
  const std::size_t F = config_.frame_features();
  const std::size_t H = config_.hidden;
  for (const char* dir : {"fwd", "bwd"}) {
    if (std::string(dir) == "bwd" && !config_.bidirectional) break;
    const std::string p = std::string("gru.") + dir;
    params_.push_back({p + ".w_ih", uniform_init(rng, {3 * H, F}, F), 2 * n, ParamKind::kRecurrent, std::nullopt});
    params_.push_back({p + ".w_hh", uniform_init(rng, {3 * H, H}, H), 2 * n, ParamKind::kRecurrent, std::nullopt});
    params_.push_back({p + ".b_ih", uniform_init(rng, {3 * H}, H), 2 * n, ParamKind::kRecurrent, std::nullopt});
    params_.push_back({p + ".b_hh", uniform_init(rng, {3 * H}, H), 2 * n, ParamKind::kRecurrent, std::nullopt});
  }
  const std::size_t head_in = config_.bidirectional ? 2 * H : H;
  const std::size_t C = config_.alphabet.num_classes();
  params_.push_back({"head.weight", uniform_init(rng, {C, head_in}, head_in), 2 * n + 1, ParamKind::kHeadWeight, std::nullopt});
  params_.push_back({"head.bias", uniform_init(rng, {C}, head_in), 2 * n + 1, ParamKind::kHeadBias, std::nullopt});
  std::stable_sort(params_.begin(), params_.end(), [](const Parameter& a, const Parameter& b) { return a.depth < b.depth; });
}

Recognizer Recognizer::clone() const {
  Recognizer copy(config_, 0);
  copy.load_state(state());
  for (std::size_t i = 0; i < bn_.size(); ++i) copy.bn_[i].populated = bn_[i].populated;
  for (std::size_t i = 0; i < params_.size(); ++i) copy.params_[i].tensor.set_requires_grad(params_[i].tensor.requires_grad());
  return copy;
}

Parameter& Recognizer::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ConfigError("no parameter named " + name);
}

const Parameter& Recognizer::parameter(const std::string& name) const {
  return const_cast<Recognizer*>(this)->parameter(name);
}

ForwardResult Recognizer::forward(const ImageBatch& batch, const ForwardOptions& options) {
  const std::size_t B = batch.size();
  if (B == 0) throw ShapeError("empty batch");
  if (batch.height != config_.height) {
    throw ShapeError("image height " + std::to_string(batch.height) + " does not match model height " +
                     std::to_string(config_.height));
  }
  if (batch.pixels.size() != B * batch.height * batch.width) throw ShapeError("image batch pixel count mismatch");
  if (batch.widths.size() != B) throw ShapeError("image batch needs one width per sample");
  for (auto w : batch.widths) {
    if (w == 0 || w > batch.width) throw ShapeError("sample width out of range");
  }
  for (auto id : options.stats_layers) {
    if (id >= bn_.size()) throw ConfigError("no BN layer with id " + std::to_string(id));
  }
  const std::size_t d = config_.downsample();
  const std::size_t H = config_.height;
  const std::size_t W = ((batch.width + d - 1) / d) * d;

  std::vector<double> px(B * H * W);
  for (std::size_t b = 0; b < B; ++b) {
    const double pad = batch.pad_values.empty() ? 1.0 : batch.pad_values[b];
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        px[(b * H + y) * W + x] = x < batch.width ? batch.pixels[(b * H + y) * batch.width + x] : pad;
      }
    }
  }
  ad::Tensor x = ad::Tensor::from({B, 1, H, W}, std::move(px));

  ForwardResult result;
  std::size_t scale = 1;
  for (std::size_t i = 0; i < config_.blocks.size(); ++i) {
    const auto& blk = config_.blocks[i];
    const ad::Tensor& weight = parameter("conv" + std::to_string(i) + ".weight").tensor;
    const ad::Tensor& bias = parameter("conv" + std::to_string(i) + ".bias").tensor;
    x = ad::conv2d(x, weight, bias, 1, 1);
    if (block_bn_[i]) {
      BatchNormLayer& bn = bn_[*block_bn_[i]];
      std::vector<std::size_t> valid(B);
      for (std::size_t b = 0; b < B; ++b) valid[b] = (batch.widths[b] + scale - 1) / scale;
      const bool want_stats = options.stats_layers.contains(bn.id());
      switch (options.mode) {
        case Mode::kTrain: {
          auto out = bn.forward_train(x, valid);
          if (want_stats) result.batch_stats.push_back({bn.id(), out.batch_mean, out.batch_var});
          x = out.normalized;
          break;
        }
        case Mode::kEval:
        case Mode::kAdapt: {
          const bool batch_norm_stats = options.mode == Mode::kAdapt && options.adapt_normalize_with_batch_stats;
          if (want_stats || batch_norm_stats) {
            auto [mean, var] = ad::channel_moments(x, valid);
            if (want_stats) result.batch_stats.push_back({bn.id(), mean, var});
            if (batch_norm_stats) {
              x = bn.normalize(x, mean, var);
              break;
            }
          }
          x = bn.forward_eval(x);
          break;
        }
      }
    }
    x = activate(x, blk.activation, config_.leaky_slope);
    if (blk.pool) {
      x = ad::maxpool2(x);
      scale *= 2;
    }
  }

  // Columns of the final feature map become frames, left to right.
  const std::size_t C = x.dim(1), Hf = x.dim(2), K = x.dim(3);
  ad::Tensor frames = ad::reshape(ad::permute(x, {0, 3, 1, 2}), {B, K, C * Hf});
  std::vector<std::size_t> lengths(B);
  for (std::size_t b = 0; b < B; ++b) lengths[b] = config_.frames_for_width(batch.widths[b]);

  auto run_gru = [&](const char* dir, bool reverse) {
    const std::string p = std::string("gru.") + dir;
    return ad::gru(frames, lengths, parameter(p + ".w_ih").tensor, parameter(p + ".w_hh").tensor,
                   parameter(p + ".b_ih").tensor, parameter(p + ".b_hh").tensor, reverse);
  };
  ad::Tensor hidden = run_gru("fwd", false);
  if (config_.bidirectional) hidden = ad::concat({hidden, run_gru("bwd", true)}, 2);
  const std::size_t hd = hidden.dim(2);
  ad::Tensor logits = ad::linear(ad::reshape(hidden, {B * K, hd}), parameter("head.weight").tensor,
                                 parameter("head.bias").tensor);
  const std::size_t classes = config_.alphabet.num_classes();
  logits = ad::reshape(logits, {B, K, classes});
  result.frames.probs = ad::softmax(logits, 2);
  result.frames.log_probs = ad::log_softmax(logits, 2);
  result.frames.lengths = std::move(lengths);
  std::sort(result.batch_stats.begin(), result.batch_stats.end(),
            [](const LayerBatchStats& a, const LayerBatchStats& b) { return a.layer_id < b.layer_id; });
  return result;
}

ParameterPartition Recognizer::set_trainable_scope(const std::set<std::size_t>& selected) {
  if (selected.empty()) throw ConfigError("trainable scope needs at least one selected BN layer");
  for (auto id : selected) {
    if (id >= bn_.size()) throw ConfigError("no BN layer with id " + std::to_string(id));
  }
  const std::size_t deepest = *selected.rbegin();
  const std::size_t limit = 2 * config_.block_of_bn(deepest) + 1;
  ParameterPartition part;
  for (auto& p : params_) {
    bool trainable = p.depth < limit;
    if (p.bn_id && selected.contains(*p.bn_id)) trainable = false;
    p.tensor.set_requires_grad(trainable);
    (trainable ? part.trainable : part.frozen).push_back(p.name);
  }
  for (const auto& layer : bn_) {
    part.frozen.push_back("bn" + std::to_string(layer.id()) + ".running_mean");
    part.frozen.push_back("bn" + std::to_string(layer.id()) + ".running_var");
  }
  return part;
}

void Recognizer::set_all_trainable() {
  for (auto& p : params_) p.tensor.set_requires_grad(true);
}

std::vector<Parameter*> Recognizer::trainable_parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p.tensor.requires_grad()) out.push_back(&p);
  }
  return out;
}

std::map<std::string, std::vector<double>> Recognizer::state() const {
  std::map<std::string, std::vector<double>> s;
  for (const auto& p : params_) s[p.name].assign(p.tensor.values().begin(), p.tensor.values().end());
  for (const auto& layer : bn_) {
    s["bn" + std::to_string(layer.id()) + ".running_mean"] = layer.running_mean;
    s["bn" + std::to_string(layer.id()) + ".running_var"] = layer.running_var;
  }
  return s;
}

void Recognizer::load_state(const std::map<std::string, std::vector<double>>& s) {
  auto fetch = [&](const std::string& name, std::size_t n) -> const std::vector<double>& {
    auto it = s.find(name);
    if (it == s.end()) throw IoError("state is missing tensor " + name);
    if (it->second.size() != n) throw IoError("state tensor " + name + " has the wrong size");
    return it->second;
  };
  for (auto& p : params_) {
    const auto& v = fetch(p.name, p.tensor.numel());
    std::copy(v.begin(), v.end(), p.tensor.mutable_values().begin());
  }
  for (auto& layer : bn_) {
    layer.running_mean = fetch("bn" + std::to_string(layer.id()) + ".running_mean", layer.channels());
    layer.running_var = fetch("bn" + std::to_string(layer.id()) + ".running_var", layer.channels());
  }
}

}  // namespace amd::model
