// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode differentiable n-dimensional float64 arrays.
//
// Every operation allocates a fresh output node. When any input requires a
// gradient the output records its parents and a closure that scatters the
// output gradient back into them; backward() walks that record once in reverse
// topological order and then releases it, so a second backward over the same
// graph raises GraphError.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace amd::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Receives the gradient of the loss w.r.t. an op's output.
using BackwardFn = std::function<void(std::span<const double> grad_out)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  /// Builds an op result. `backward` is only retained when some input
  /// requires a gradient and gradient recording is enabled.
  static Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                            BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  double item() const;
  double at(std::size_t flat_index) const { return values()[flat_index]; }

  /// Writable view for leaf tensors (parameters, inputs). Refuses tensors
  /// produced by an operation.
  std::span<double> mutable_values();

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  /// Gradient after backward(); zeros when nothing flowed in.
  std::span<const double> grad() const;
  /// Grad buffer, allocated on first use; ops accumulate into it.
  std::span<double> grad_accumulator() const;
  void zero_grad();

  /// Copy detached from any graph.
  Tensor detach() const;

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  friend void backward(const Tensor& root);
};

/// Back-propagates from a scalar root. Throws GraphError when the graph has
/// already been consumed by an earlier call.
void backward(const Tensor& root);

bool grad_enabled();

/// Disables graph recording for its lifetime (per thread).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace amd::ad
