// Copyright 2026 The afx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "afx/tensor/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "afx/error.hpp"

namespace afx {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace detail {

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

}  // namespace detail

namespace {

void check_shape(const Shape& shape, std::size_t size) {
  for (std::size_t d : shape) {
    if (d == 0) fail(ErrorCode::kShapeError, "zero extent in " + shape_string(shape));
  }
  if (shape_numel(shape) != size) {
    fail(ErrorCode::kShapeError, "shape " + shape_string(shape) + " does not hold " +
                                     std::to_string(size) + " values");
  }
}

void check_finite(std::span<const double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, std::string("non-finite value in ") + where);
  }
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  check_shape(shape, data.size());
  check_finite(data, "tensor construction");
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) fail(ErrorCode::kShapeError, "undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) fail(ErrorCode::kShapeError, "axis out of range for " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const double> Tensor::data() const {
  shape();
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  shape();
  if (!node_->leaf) fail(ErrorCode::kInvalidArgument, "in-place write to a graph interior");
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) fail(ErrorCode::kShapeError, "item() on " + shape_string(shape()));
  return node_->data[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  const Shape& s = shape();
  if (s.size() != 2 || row >= s[0] || col >= s[1]) {
    fail(ErrorCode::kShapeError, "at() out of range for " + shape_string(s));
  }
  return node_->data[row * s[1] + col];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  shape();
  if (!node_->leaf) fail(ErrorCode::kInvalidArgument, "requires_grad is fixed on interior nodes");
  node_->requires_grad = value;
  if (!value) node_->grad.clear();
}

bool Tensor::is_leaf() const { return node_ && node_->leaf; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) fail(ErrorCode::kMissingGrad, "tensor has no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

void Tensor::backward() const {
  if (numel() != 1) fail(ErrorCode::kShapeError, "backward() needs a scalar, got " + shape_string(shape()));
  if (node_->consumed) fail(ErrorCode::kStaleGraph, "graph already differentiated; run a new forward pass");
  if (!node_->requires_grad) {
    node_->consumed = true;
    return;
  }

  // Iterative post-order DFS over interior nodes.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !parent->leaf && seen.insert(parent).second) {
        if (parent->consumed) {
          fail(ErrorCode::kStaleGraph, "graph shares a subgraph that was already differentiated");
        }
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  if (!node_->leaf) node_->grad.assign(1, 1.0);
  else node_->grad_buffer()[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->leaf || node->grad.empty() || !node->backward_fn) continue;
    check_finite(node->grad, "backward");
    node->backward_fn(*node);
  }

  for (detail::Node* node : order) {
    if (node->leaf) continue;
    node->consumed = true;
    node->parents.clear();
    node->backward_fn = nullptr;
    node->grad.clear();
  }
}

Tensor Tensor::detach() const {
  return Tensor(shape(), node_->data, false);
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                   std::function<void(detail::Node&)> backward) {
  check_shape(shape, data.size());
  check_finite(data, "operator output");
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->leaf = false;
  for (const Tensor& p : parents) {
    if (p.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace afx
