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

#include "afx/tensor/nn.hpp"

#include <cmath>

#include "afx/error.hpp"
#include "afx/tensor/ops.hpp"

namespace afx::nn {

Tensor positional_encoding(std::size_t num_frames, std::size_t dim) {
  if (num_frames == 0 || dim == 0) {
    fail(ErrorCode::kInvalidArgument, "positional encoding needs positive sizes");
  }
  if (dim % 2 != 0) fail(ErrorCode::kOddDimension, "positional encoding dim " + std::to_string(dim));
  std::vector<double> table(num_frames * dim);
  for (std::size_t pos = 0; pos < num_frames; ++pos) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle = static_cast<double>(pos) /
                           std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
      table[pos * dim + 2 * i] = std::sin(angle);
      table[pos * dim + 2 * i + 1] = std::cos(angle);
    }
  }
  return Tensor({num_frames, dim}, std::move(table));
}

AttentionResult multi_head_attention(const Tensor& x, const AttentionWeights& weights,
                                     std::size_t num_heads) {
  if (x.rank() != 2) fail(ErrorCode::kShapeError, "attention input must be [frames×dim]");
  const std::size_t dim = x.dim(1);
  if (num_heads == 0 || dim % num_heads != 0) {
    fail(ErrorCode::kHeadMismatch, "dim " + std::to_string(dim) + " is not divisible by " +
                                       std::to_string(num_heads) + " heads");
  }
  const std::size_t head_dim = dim / num_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Tensor q = ops::linear(x, weights.q_weight, weights.q_bias);
  Tensor k = ops::linear(x, weights.k_weight, weights.k_bias);
  Tensor v = ops::linear(x, weights.v_weight, weights.v_bias);

  AttentionResult result;
  std::vector<Tensor> heads;
  heads.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    Tensor qh = ops::slice_cols(q, h * head_dim, head_dim);
    Tensor kh = ops::slice_cols(k, h * head_dim, head_dim);
    Tensor vh = ops::slice_cols(v, h * head_dim, head_dim);
    Tensor scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt);
    Tensor attn = ops::softmax_rows(scores);
    heads.push_back(ops::matmul(attn, vh));
    result.attention.push_back(attn);
  }
  Tensor merged = num_heads == 1 ? heads.front() : ops::concat_cols(heads);
  result.output = ops::linear(merged, weights.out_weight, weights.out_bias);
  return result;
}

Tensor feed_forward(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
                    const Tensor& b2) {
  return ops::linear(ops::relu(ops::linear(x, w1, b1)), w2, b2);
}

}  // namespace afx::nn
