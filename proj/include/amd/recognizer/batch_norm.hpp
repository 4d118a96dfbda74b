// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amd/autodiff/tensor.hpp"

namespace amd::model {

/// Per-channel batch normalization with exponentially averaged running
/// statistics. Running statistics move only in forward_train().
class BatchNormLayer {
 public:
  BatchNormLayer(std::size_t id, std::size_t channels, double eps, double momentum);

  struct TrainOutput {
    ad::Tensor normalized;
    ad::Tensor batch_mean;
    ad::Tensor batch_var;
  };

  /// Normalizes with batch statistics over batch and spatial positions and
  /// folds them into the running averages:
  ///   running <- (1 - momentum) * running + momentum * batch.
  TrainOutput forward_train(const ad::Tensor& x, std::span<const std::size_t> valid_width = {});

  /// Normalizes with the running statistics. Throws ContractError when they
  /// were never populated.
  ad::Tensor forward_eval(const ad::Tensor& x) const;

  /// Normalizes with externally supplied statistics (batch or running).
  ad::Tensor normalize(const ad::Tensor& x, const ad::Tensor& mean, const ad::Tensor& var) const;

  ad::Tensor running_mean_tensor() const;
  ad::Tensor running_var_tensor() const;

  std::size_t id() const { return id_; }
  std::size_t channels() const { return channels_; }
  double eps() const { return eps_; }
  double momentum() const { return momentum_; }

  ad::Tensor gamma;
  ad::Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  bool populated = false;

 private:
  std::size_t id_;
  std::size_t channels_;
  double eps_;
  double momentum_;
};

}  // namespace amd::model
