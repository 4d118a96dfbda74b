// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/recognizer/batch_norm.hpp"

#include "amd/autodiff/ops.hpp"
#include "amd/errors.hpp"

namespace amd::model {

BatchNormLayer::BatchNormLayer(std::size_t id, std::size_t channels, double eps, double momentum)
    : gamma(ad::Tensor::full({channels}, 1.0)),
      beta(ad::Tensor::zeros({channels})),
      running_mean(channels, 0.0),
      running_var(channels, 1.0),
      id_(id),
      channels_(channels),
      eps_(eps),
      momentum_(momentum) {
  if (!(eps > 0.0)) throw ConfigError("BN epsilon must be positive");
  if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("BN momentum must lie in (0,1)");
}

BatchNormLayer::TrainOutput BatchNormLayer::forward_train(const ad::Tensor& x, std::span<const std::size_t> valid_width) {
  if (x.rank() != 4 || x.dim(1) != channels_) throw ShapeError("BN input channel mismatch");
  auto [mean, var] = ad::channel_moments(x, valid_width);
  for (std::size_t c = 0; c < channels_; ++c) {
    running_mean[c] = (1.0 - momentum_) * running_mean[c] + momentum_ * mean.at(c);
    running_var[c] = (1.0 - momentum_) * running_var[c] + momentum_ * var.at(c);
  }
  populated = true;
  return {normalize(x, mean, var), mean, var};
}

ad::Tensor BatchNormLayer::forward_eval(const ad::Tensor& x) const {
  if (!populated) throw ContractError("BN layer " + std::to_string(id_) + " has no running statistics");
  return normalize(x, running_mean_tensor(), running_var_tensor());
}

ad::Tensor BatchNormLayer::normalize(const ad::Tensor& x, const ad::Tensor& mean, const ad::Tensor& var) const {
  return ad::batch_norm(x, mean, var, gamma, beta, eps_);
}

ad::Tensor BatchNormLayer::running_mean_tensor() const { return ad::Tensor::from({channels_}, running_mean); }
ad::Tensor BatchNormLayer::running_var_tensor() const { return ad::Tensor::from({channels_}, running_var); }

}  // namespace amd::model
