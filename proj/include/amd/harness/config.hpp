// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "amd/loss/amd_loss.hpp"
#include "json.hpp"

namespace amd::harness {

/// Source pre-training.
struct TrainConfig {
  double lr = 3e-4;
  std::size_t batch_size = 16;
  std::size_t patience = 20;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdaptConfig {
  loss::AmdWeights weights;
  std::set<std::size_t> bn_layers;  // empty means "deepest" for the trainable scope
  double lr = 1e-4;
  std::size_t batch_size = 16;
  std::size_t patience = 20;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;
  bool normalize_with_batch_stats = false;
  loss::DiversifyForm diversify_form = loss::DiversifyForm::kAveragedProbs;

  void validate() const;
};

/// Random search over AMD weights, learning rate and BN subsets.
struct SearchConfig {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double lr_min = 1e-5;
  double lr_max = 3e-4;
  std::vector<double> weight_grid{0, 1, 5, 10, 25, 50};
  /// Candidate BN subsets; empty means every non-empty subset of the model's layers.
  std::vector<std::set<std::size_t>> bn_subsets;
  std::size_t jobs = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const AdaptConfig& c);
nlohmann::json to_json(const SearchConfig& c);
/// The parsers reject unknown keys and report the offending path with `where`.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& where = "train");
AdaptConfig adapt_config_from_json(const nlohmann::json& j, const std::string& where = "adapt");
SearchConfig search_config_from_json(const nlohmann::json& j, const std::string& where = "search");

}  // namespace amd::harness
