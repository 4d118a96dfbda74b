// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace amd::harness {

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the model before any update
  // Mean training loss terms over the epoch's batches. Pre-training fills
  // `ctc`; adaptation fills the AMD terms and `loss` = weighted sum.
  double ctc = 0.0;
  double align = 0.0;
  double minimize = 0.0;
  double diversify = 0.0;
  double loss = 0.0;
  double val_cer = 0.0;
  double val_wer = 0.0;
  double wall_seconds = 0.0;  // kept out of the JSON record, see RunRecord::to_json
};

struct RunRecord {
  std::string stage;  // "pretrain" or "adapt"
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::optional<double> test_cer;
  std::optional<double> test_wer;
  bool noop = false;
  /// Validation labels of the target domain serve model selection only.
  bool selection_uses_labels = false;
  nlohmann::json config = nlohmann::json::object();

  double best_val_cer() const;
  /// Timing fields are emitted only with `with_timing`, so records of
  /// identical runs serialize to identical bytes.
  nlohmann::json to_json(bool with_timing = false) const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace amd::harness
