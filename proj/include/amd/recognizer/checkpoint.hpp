// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint file layout:
//   bytes 0..7   "AMDCKPT1"
//   bytes 8..15  header length N, little-endian uint64
//   N bytes      UTF-8 JSON header: {"config", "metadata", "bn_populated",
//                "tensors": [{"name", "shape", "offset"}]}; offsets are
//                byte offsets into the payload
//   payload      little-endian IEEE-754 float64 values, tensors back to back

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "amd/recognizer/recognizer.hpp"
#include "json.hpp"

namespace amd::model {

struct CheckpointMetadata {
  std::size_t epoch = 0;
  double val_cer = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
  Recognizer model;
  CheckpointMetadata metadata;
};

std::string serialize_checkpoint(const Recognizer& model, const CheckpointMetadata& metadata);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Recognizer& model, const CheckpointMetadata& metadata);
/// Throws IoError for unreadable or malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amd::model
