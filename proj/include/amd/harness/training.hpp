// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "amd/harness/config.hpp"
#include "amd/harness/run_record.hpp"
#include "amd/metrics/metrics.hpp"
#include "amd/recognizer/recognizer.hpp"
#include "amd/synth/dataset.hpp"

namespace amd::harness {

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Greedy decoding in eval mode over fixed-order batches.
metrics::EvalReport evaluate(model::Recognizer& model, const std::vector<synth::Sample>& samples,
                             std::size_t batch_size = 16);

struct TrainedModel {
  model::Recognizer model;
  RunRecord record;
};

/// CTC training with Adam. Several train sources are batched balanced. The
/// returned weights are those of the epoch with the lowest validation CER
/// (epoch 0 included, earliest wins ties); training stops `patience` epochs
/// after the best one. Throws DivergenceError on a non-finite loss.
TrainedModel pretrain(const model::ModelConfig& config, const std::vector<std::vector<synth::Sample>>& train_sources,
                      const std::vector<synth::Sample>& val, const TrainConfig& train,
                      const std::vector<synth::Sample>* test = nullptr, const EpochCallback& on_epoch = {});

/// Source-free adaptation. `target_train` must be transcript-free (as
/// produced by synth::load_images); a transcript there is a ContractError.
/// Validation labels are used for model selection only. After the run every
/// frozen parameter and running statistic is compared bit-for-bit with the
/// source; a difference is a ContractError.
TrainedModel adapt(const model::Recognizer& source, const std::vector<synth::Sample>& target_train,
                   const std::vector<synth::Sample>& target_val, const AdaptConfig& config,
                   const std::vector<synth::Sample>* test = nullptr, const EpochCallback& on_epoch = {});

}  // namespace amd::harness
