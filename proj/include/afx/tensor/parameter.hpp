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

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "afx/tensor/tensor.hpp"

namespace afx {

/// A named leaf tensor with a freeze flag. `trainable` and the tensor's
/// requires_grad are kept in lock-step.
class Parameter {
 public:
  Parameter(std::string name, Tensor tensor, bool trainable);

  const std::string& name() const noexcept { return name_; }
  const Tensor& tensor() const noexcept { return tensor_; }
  Tensor& tensor() noexcept { return tensor_; }
  bool trainable() const noexcept { return trainable_; }
  void set_trainable(bool value);

 private:
  std::string name_;
  Tensor tensor_;
  bool trainable_;
};

class ParameterSet {
 public:
  // Registers a parameter and returns a handle aliasing its storage.
  Tensor add(std::string name, Tensor init, bool trainable = true);

  std::vector<Parameter>& all() noexcept { return params_; }
  const std::vector<Parameter>& all() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.size(); }

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& get(std::string_view name);

  void zero_grad();
  void set_trainable(bool value);
  void set_trainable_where(const std::function<bool(const Parameter&)>& pred, bool value);

  // Number of scalar entries across trainable parameters.
  std::size_t trainable_scalars() const;
  std::size_t scalars_where(const std::function<bool(const Parameter&)>& pred) const;

 private:
  std::vector<Parameter> params_;
};

}  // namespace afx
