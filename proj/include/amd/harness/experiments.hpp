// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amd/harness/config.hpp"
#include "amd/recognizer/recognizer.hpp"
#include "amd/synth/dataset.hpp"
#include "amd/synth/shift.hpp"

namespace amd::harness {

struct Scenario {
  std::string name;
  synth::DomainShiftConfig shift;
};

/// Slant, stroke thickness, polarity inversion and additive noise.
std::vector<Scenario> builtin_scenarios();

struct TargetData {
  std::vector<synth::Sample> train_images;  // transcripts stripped
  std::vector<synth::Sample> val;
  std::vector<synth::Sample> test;
};

struct ScenarioData {
  std::string name;
  TargetData data;
  double baseline_test_cer = 0.0;
};

/// Evaluates the unadapted source model on the scenario's test split.
ScenarioData make_scenario(model::Recognizer& source, std::string name, TargetData data, std::size_t batch_size = 16);

/// 100 * (baseline - adapted) / baseline; 0 when the baseline is 0.
double relative_decrease(double baseline, double adapted);
/// Median with the even-count midpoint convention. Throws DomainError when empty.
double median(std::vector<double> v);

struct Trial {
  std::size_t index = 0;
  AdaptConfig config;
  double val_cer = 0.0;
  double test_cer = 0.0;
  std::size_t best_epoch = 0;
  double wall_seconds = 0.0;  // not part of any result file
};

/// The configurations a search visits, in trial order. Trial t draws from
/// derive_seed(search.seed, t, stream): each weight from the grid, the
/// learning rate log-uniformly, and a BN subset uniformly. `active` masks the
/// (align, minimize, diversify) terms: masked terms are 0 and unmasked terms
/// are drawn from the non-zero grid values when any mask is off.
std::vector<AdaptConfig> sample_trials(const SearchConfig& search, const AdaptConfig& base, std::size_t bn_count,
                                       std::array<bool, 3> active = {true, true, true});

/// Runs every sampled trial (on `search.jobs` threads) and returns them
/// ranked by validation CER, trial index breaking ties.
std::vector<Trial> random_search(const model::Recognizer& source, const TargetData& target, const AdaptConfig& base,
                                 const SearchConfig& search, std::array<bool, 3> active = {true, true, true});

struct LossAblationRow {
  std::array<bool, 3> terms{};  // align, minimize, diversify
  double median_decrease = 0.0;
  std::vector<double> per_scenario;
};

/// The seven non-empty term subsets in table order: a, m, d, am, ad, md, amd.
std::vector<std::array<bool, 3>> loss_term_subsets();

/// For each subset and scenario, the best-by-validation trial of a masked
/// random search; its test CER gives the relative decrease.
std::vector<LossAblationRow> ablate_loss_terms(const model::Recognizer& source,
                                               const std::vector<ScenarioData>& scenarios, const AdaptConfig& base,
                                               const SearchConfig& search);
std::string to_tsv(const std::vector<LossAblationRow>& rows, const std::vector<ScenarioData>& scenarios);

struct BnAblationRow {
  std::set<std::size_t> layers;
  double median_decrease = 0.0;
  double max_decrease = 0.0;
  std::vector<double> per_scenario;
};

/// Every non-empty subset of BN layers (n <= 4) or the explicit list, each
/// adapted with the fixed weights and learning rate of `base`.
std::vector<BnAblationRow> ablate_bn_layers(const model::Recognizer& source,
                                            const std::vector<ScenarioData>& scenarios, const AdaptConfig& base,
                                            std::size_t jobs = 1,
                                            const std::vector<std::set<std::size_t>>& subsets = {});
std::string to_tsv(const std::vector<BnAblationRow>& rows, const std::vector<ScenarioData>& scenarios);

std::string layers_label(const std::set<std::size_t>& layers);

}  // namespace amd::harness
