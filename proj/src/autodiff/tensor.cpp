// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/autodiff/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "amd/errors.hpp"

namespace amd::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive: " + shape_str(shape));
  }
  if (ad::numel(shape) != values.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     shape_str(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = ad::numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                           BackwardFn backward) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("non-finite value produced by an operation");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  if (g_grad_enabled) {
    for (const auto& in : inputs) {
      if (in.node_ && in.node_->requires_grad) {
        if (in.node_->consumed) {
          throw GraphError("input belongs to a graph that was already back-propagated");
        }
        node->requires_grad = true;
      }
    }
    if (node->requires_grad) {
      node->parents.reserve(inputs.size());
      for (auto& in : inputs) {
        if (in.node_ && in.node_->requires_grad) node->parents.push_back(in.node_);
      }
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) throw ShapeError("axis out of range");
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::values() const { return node_->value; }

double Tensor::item() const {
  if (node_->value.size() != 1) throw ShapeError("item() on a tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

std::span<double> Tensor::mutable_values() {
  if (node_->backward || !node_->parents.empty()) {
    throw GraphError("cannot mutate a tensor produced by a recorded operation");
  }
  return node_->value;
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (node_->backward) throw GraphError("requires_grad is fixed for op results");
  node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return grad_accumulator(); }

std::span<double> Tensor::grad_accumulator() const {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

Tensor Tensor::detach() const { return from(node_->shape, node_->value, false); }

void backward(const Tensor& root) {
  if (!root.defined()) throw GraphError("backward on an undefined tensor");
  if (root.numel() != 1) throw ShapeError("backward requires a scalar root, got " + shape_str(root.shape()));
  Node* r = root.node_.get();
  if (r->consumed) throw GraphError("backward called twice on the same graph");
  if (!r->requires_grad) throw GraphError("root does not depend on any tensor requiring a gradient");

  // Iterative post-order DFS yields a topological order (parents first).
  // Owning pointers keep interior nodes alive while closures are released.
  std::vector<std::shared_ptr<Node>> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  stack.emplace_back(root.node_, 0);
  visited.insert(r);
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second < top.first->parents.size()) {
      std::shared_ptr<Node> p = top.first->parents[top.second++];
      if (p->consumed) throw GraphError("graph contains a node consumed by an earlier backward");
      if (visited.insert(p.get()).second) stack.emplace_back(std::move(p), 0);
    } else {
      order.push_back(std::move(top.first));
      stack.pop_back();
    }
  }

  // Interior gradients are rebuilt on every pass; leaves accumulate.
  for (auto& n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  r->grad.assign(1, 1.0);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = **it;
    if (n.backward) {
      n.backward(n.grad);
      n.backward = nullptr;
      n.parents.clear();
      n.consumed = true;
    }
  }
}

}  // namespace amd::ad
