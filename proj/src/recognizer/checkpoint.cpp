// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/recognizer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "amd/errors.hpp"

namespace amd::model {

namespace {

constexpr char kMagic[8] = {'A', 'M', 'D', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

}  // namespace

std::string serialize_checkpoint(const Recognizer& model, const CheckpointMetadata& metadata) {
  nlohmann::json header;
  header["config"] = to_json(model.config());
  header["metadata"] = {{"epoch", metadata.epoch}, {"val_cer", metadata.val_cer}, {"seed", metadata.seed},
                        {"extra", metadata.extra}};
  nlohmann::json populated = nlohmann::json::array();
  for (const auto& bn : model.bn_layers()) populated.push_back(bn.populated);
  header["bn_populated"] = populated;

  std::string payload;
  nlohmann::json tensors = nlohmann::json::array();
  auto append = [&](const std::string& name, const ad::Shape& shape, std::span<const double> values) {
    tensors.push_back({{"name", name}, {"shape", shape}, {"offset", payload.size()}});
    payload.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
  };
  for (const auto& p : model.parameters()) append(p.name, p.tensor.shape(), p.tensor.values());
  for (const auto& bn : model.bn_layers()) {
    const std::string prefix = "bn" + std::to_string(bn.id());
    append(prefix + ".running_mean", {bn.channels()}, bn.running_mean);
    append(prefix + ".running_var", {bn.channels()}, bn.running_var);
  }
  header["tensors"] = tensors;

  const std::string text = header.dump();
  std::string out(kMagic, 8);
  put_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw IoError("not a checkpoint file");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 8);
  if (header_len > bytes.size() - 16) throw IoError("checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const std::size_t payload_start = 16 + header_len;
  const std::size_t payload_len = bytes.size() - payload_start;

  try {
    ModelConfig cfg = model_config_from_json(header.at("config"));
    Recognizer model(cfg, 0);
    std::map<std::string, std::vector<double>> state;
    for (const auto& t : header.at("tensors")) {
      const auto shape = t.at("shape").get<ad::Shape>();
      const std::size_t n = ad::numel(shape);
      const std::size_t offset = t.at("offset").get<std::size_t>();
      if (offset > payload_len || n * sizeof(double) > payload_len - offset) {
        throw IoError("checkpoint tensor " + t.at("name").get<std::string>() + " runs past the payload");
      }
      std::vector<double> v(n);
      std::memcpy(v.data(), bytes.data() + payload_start + offset, n * sizeof(double));
      state[t.at("name").get<std::string>()] = std::move(v);
    }
    model.load_state(state);
    const auto& populated = header.at("bn_populated");
    if (populated.size() != model.bn_layers().size()) throw IoError("checkpoint BN flag count mismatch");
    for (std::size_t i = 0; i < populated.size(); ++i) model.bn_layers()[i].populated = populated[i].get<bool>();

    CheckpointMetadata meta;
    const auto& m = header.at("metadata");
    meta.epoch = m.at("epoch").get<std::size_t>();
    meta.val_cer = m.at("val_cer").get<double>();
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.extra = m.value("extra", nlohmann::json::object());
    return Checkpoint{std::move(model), std::move(meta)};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint holds an invalid model config: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Recognizer& model, const CheckpointMetadata& metadata) {
  const std::string bytes = serialize_checkpoint(model, metadata);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace amd::model
