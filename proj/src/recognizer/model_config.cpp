// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/recognizer/model_config.hpp"

#include <set>

#include "amd/errors.hpp"

namespace amd::model {

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kRelu: return "relu";
    case Activation::kNone: return "none";
  }
  return "none";
}

Activation activation_from(const std::string& s) {
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "relu") return Activation::kRelu;
  if (s == "none") return Activation::kNone;
  throw ConfigError("unknown activation: " + s);
}

}  // namespace

void ModelConfig::validate() const {
  if (blocks.empty()) throw ConfigError("model needs at least one convolutional block");
  if (bn_count() == 0) throw ConfigError("model needs at least one batch-normalization layer");
  if (height == 0 || height % downsample() != 0) {
    throw ConfigError("input height must be divisible by the pooling factor " + std::to_string(downsample()));
  }
  if (hidden == 0) throw ConfigError("recurrent hidden size must be positive");
  if (alphabet.size() == 0) throw ConfigError("model alphabet is empty");
  if (!(bn_eps > 0.0)) throw ConfigError("bn_eps must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) throw ConfigError("bn_momentum must lie in (0,1)");
  for (const auto& b : blocks) {
    if (b.channels == 0) throw ConfigError("block channel count must be positive");
  }
}

std::size_t ModelConfig::downsample() const {
  std::size_t d = 1;
  for (const auto& b : blocks) {
    if (b.pool) d *= 2;
  }
  return d;
}

std::size_t ModelConfig::frames_for_width(std::size_t width) const {
  const std::size_t d = downsample();
  return (width + d - 1) / d;
}

std::size_t ModelConfig::bn_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.batch_norm ? 1 : 0;
  return n;
}

std::size_t ModelConfig::block_of_bn(std::size_t bn_id) const {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!blocks[i].batch_norm) continue;
    if (seen == bn_id) return i;
    ++seen;
  }
  throw ConfigError("no BN layer with id " + std::to_string(bn_id));
}

std::size_t ModelConfig::frame_features() const { return blocks.back().channels * (height / downsample()); }

nlohmann::json to_json(const ModelConfig& cfg) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : cfg.blocks) {
    blocks.push_back({{"channels", b.channels},
                      {"batch_norm", b.batch_norm},
                      {"activation", activation_name(b.activation)},
                      {"pool", b.pool}});
  }
  return {{"height", cfg.height},
          {"blocks", blocks},
          {"hidden", cfg.hidden},
          {"bidirectional", cfg.bidirectional},
          {"leaky_slope", cfg.leaky_slope},
          {"bn_eps", cfg.bn_eps},
          {"bn_momentum", cfg.bn_momentum},
          {"alphabet", cfg.alphabet.to_utf8()}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"height", "blocks", "hidden", "bidirectional", "leaky_slope",
                                           "bn_eps", "bn_momentum", "alphabet"};
  if (!j.is_object()) throw ConfigError("model: expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("model." + k + ": unknown key");
  }
  ModelConfig cfg;
  try {
    if (j.contains("height")) cfg.height = j.at("height").get<std::size_t>();
    if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::size_t>();
    if (j.contains("bidirectional")) cfg.bidirectional = j.at("bidirectional").get<bool>();
    if (j.contains("leaky_slope")) cfg.leaky_slope = j.at("leaky_slope").get<double>();
    if (j.contains("bn_eps")) cfg.bn_eps = j.at("bn_eps").get<double>();
    if (j.contains("bn_momentum")) cfg.bn_momentum = j.at("bn_momentum").get<double>();
    if (j.contains("alphabet")) cfg.alphabet = text::Alphabet::from_utf8(j.at("alphabet").get<std::string>());
    if (j.contains("blocks")) {
      cfg.blocks.clear();
      for (const auto& b : j.at("blocks")) {
        for (const auto& [k, v] : b.items()) {
          if (k != "channels" && k != "batch_norm" && k != "activation" && k != "pool") {
            throw ConfigError("model.blocks." + k + ": unknown key");
          }
        }
        ConvBlockConfig blk;
        blk.channels = b.at("channels").get<std::size_t>();
        blk.batch_norm = b.value("batch_norm", true);
        blk.activation = activation_from(b.value("activation", std::string("leaky_relu")));
        blk.pool = b.value("pool", false);
        cfg.blocks.push_back(blk);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return cfg;
}

}  // namespace amd::model
