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

#include <vector>

#include "afx/tensor/tensor.hpp"

// Transformer-encoder building blocks composed from afx::ops primitives.
namespace afx::nn {

/// Sinusoidal table: PE[pos, 2i] = sin(pos / 10000^(2i/dim)),
/// PE[pos, 2i+1] = cos(pos / 10000^(2i/dim)). Throws OddDimension.
Tensor positional_encoding(std::size_t num_frames, std::size_t dim);

struct AttentionWeights {
  Tensor q_weight, q_bias;
  Tensor k_weight, k_bias;
  Tensor v_weight, v_bias;
  Tensor out_weight, out_bias;
};

struct AttentionResult {
  Tensor output;                  // [frames × dim]
  std::vector<Tensor> attention;  // one [frames × frames] row-stochastic matrix per head
};

/// Scaled dot-product attention over `num_heads` column slices of the
/// projected queries/keys/values, concatenated and output-projected.
AttentionResult multi_head_attention(const Tensor& x, const AttentionWeights& weights,
                                     std::size_t num_heads);

// w2·relu(w1·x + b1) + b2, row-wise.
Tensor feed_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2);

}  // namespace afx::nn
