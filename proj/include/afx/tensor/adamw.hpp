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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afx/tensor/parameter.hpp"

namespace afx {

struct AdamWOptions {
  double lr = 1e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamWState {
  std::uint64_t step_count = 0;
  // Keyed by parameter name.
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

/// AdamW with decoupled weight decay:
///   w <- w - lr * wd * w
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps)
/// Frozen parameters are skipped entirely.
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {});

  // Throws MissingGrad (before touching anything) if a trainable parameter
  // has no gradient.
  void step(ParameterSet& params);

  const AdamWOptions& options() const noexcept { return options_; }
  const AdamWState& state() const noexcept { return state_; }
  void load_state(AdamWState state) { state_ = std::move(state); }

 private:
  AdamWOptions options_;
  AdamWState state_;
};

}  // namespace afx
