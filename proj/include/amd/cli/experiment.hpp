// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// JSON experiment specs. Every random stream of a run is derived from the
// top-level "seed"; sections may not carry seeds of their own.
//
//   {
//     "seed": 1,
//     "output": "runs/demo",
//     "model":   { ...model layout, alphabet taken from the source data... },
//     "source":  { "manifest": "path" } | DataSpec | [ ...several, batched balanced... ],
//     "target":  { "manifest": "path" } | DataSpec,
//     "train":   { "lr", "batch_size", "patience", "max_epochs" },
//     "adapt":   { "weights": {...}, "bn_layers": [...], "lr", ... },
//     "search":  { "trials", "lr_min", "lr_max", "weight_grid", "bn_subsets", "jobs" },
//     "scenarios": [ { "name": "...", "shift": {...} } ]
//   }
//
// DataSpec: "lexicon" (word list or {"size", "min_length", "max_length"}),
// "count", optional "alphabet", "splits", "height", "font", "augmentation",
// "shift".

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "amd/harness/config.hpp"
#include "amd/harness/experiments.hpp"
#include "amd/recognizer/model_config.hpp"
#include "amd/synth/dataset.hpp"
#include "json.hpp"

namespace amd::cli {

struct DataSpec {
  std::optional<std::filesystem::path> manifest;  // use an existing dataset
  synth::DatasetSpec generate;                    // otherwise generate this one
};

struct ExperimentSpec {
  std::uint64_t seed = 0;
  std::filesystem::path output = "amd_out";
  nlohmann::json model = nlohmann::json::object();
  std::vector<DataSpec> sources;
  std::optional<DataSpec> target;
  harness::TrainConfig train;
  harness::AdaptConfig adapt;
  harness::SearchConfig search;
  std::vector<harness::Scenario> scenarios;  // empty: the built-in four
};

/// Parses and validates a spec. Relative manifest paths resolve against
/// `base_dir`. `seed_override` replaces the top-level seed before any
/// derivation. Throws ConfigError naming the offending field.
ExperimentSpec parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentSpec load_experiment(const std::filesystem::path& path,
                               std::optional<std::uint64_t> seed_override = std::nullopt);

/// Writes (or reuses) the dataset and returns its manifest path.
std::filesystem::path materialize(const DataSpec& data, const std::filesystem::path& out_dir);

/// The model layout of the spec over the given alphabet.
model::ModelConfig model_config(const ExperimentSpec& spec, const text::Alphabet& alphabet);

/// Target train images (transcripts never read), labelled val and test.
harness::TargetData load_target(const std::filesystem::path& manifest, std::size_t height);

}  // namespace amd::cli
