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

#include "afx/tensor/adamw.hpp"

#include <cmath>

#include "afx/error.hpp"

namespace afx {

AdamW::AdamW(AdamWOptions options) : options_(options) {
  if (!(options_.lr > 0.0)) fail(ErrorCode::kInvalidArgument, "AdamW learning rate must be positive");
  if (options_.weight_decay < 0.0) fail(ErrorCode::kInvalidArgument, "AdamW weight decay must be >= 0");
}

void AdamW::step(ParameterSet& params) {
  for (const Parameter& p : params.all()) {
    if (p.trainable() && !p.tensor().has_grad()) {
      fail(ErrorCode::kMissingGrad, "trainable parameter '" + p.name() + "' has no gradient");
    }
  }

  ++state_.step_count;
  const double t = static_cast<double>(state_.step_count);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  const double decay = 1.0 - options_.lr * options_.weight_decay;

  for (Parameter& p : params.all()) {
    if (!p.trainable()) continue;
    std::span<double> w = p.tensor().mutable_data();
    std::span<const double> g = p.tensor().grad();
    auto& m = state_.m[p.name()];
    auto& v = state_.v[p.name()];
    if (m.size() != w.size()) {
      m.assign(w.size(), 0.0);
      v.assign(w.size(), 0.0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] *= decay;
      w[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace afx
