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

#include "afx/tensor/parameter.hpp"

#include "afx/error.hpp"

namespace afx {

Parameter::Parameter(std::string name, Tensor tensor, bool trainable)
    : name_(std::move(name)), tensor_(std::move(tensor)), trainable_(trainable) {
  if (!tensor_.defined() || !tensor_.is_leaf()) {
    fail(ErrorCode::kInvalidArgument, "parameter '" + name_ + "' must be a defined leaf tensor");
  }
  tensor_.set_requires_grad(trainable_);
}

void Parameter::set_trainable(bool value) {
  trainable_ = value;
  tensor_.set_requires_grad(value);
}

Tensor ParameterSet::add(std::string name, Tensor init, bool trainable) {
  if (find(name)) fail(ErrorCode::kInvalidArgument, "duplicate parameter '" + name + "'");
  params_.emplace_back(std::move(name), std::move(init), trainable);
  return params_.back().tensor();
}

Parameter* ParameterSet::find(std::string_view name) {
  for (Parameter& p : params_) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const Parameter& p : params_) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

Parameter& ParameterSet::get(std::string_view name) {
  Parameter* p = find(name);
  if (!p) fail(ErrorCode::kConfigMismatch, "no parameter named '" + std::string(name) + "'");
  return *p;
}

void ParameterSet::zero_grad() {
  for (Parameter& p : params_) p.tensor().zero_grad();
}

void ParameterSet::set_trainable(bool value) {
  for (Parameter& p : params_) p.set_trainable(value);
}

void ParameterSet::set_trainable_where(const std::function<bool(const Parameter&)>& pred,
                                       bool value) {
  for (Parameter& p : params_) {
    if (pred(p)) p.set_trainable(value);
  }
}

std::size_t ParameterSet::trainable_scalars() const {
  return scalars_where([](const Parameter& p) { return p.trainable(); });
}

std::size_t ParameterSet::scalars_where(const std::function<bool(const Parameter&)>& pred) const {
  std::size_t n = 0;
  for (const Parameter& p : params_) {
    if (pred(p)) n += p.tensor().numel();
  }
  return n;
}

}  // namespace afx
