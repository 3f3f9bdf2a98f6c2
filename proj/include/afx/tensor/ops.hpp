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
#include <random>
#include <span>

#include "afx/tensor/tensor.hpp"

// Differentiable primitives. Everything is 2-D row-major unless noted; there
// is no general broadcasting.
namespace afx::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// x[m×in] · w[out×in]ᵀ + b[out]. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor softmax_rows(const Tensor& x);

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_cols(std::span<const Tensor> parts);
// Flattens each input into one row of the result; all inputs same numel.
Tensor stack_rows(std::span<const Tensor> rows);
// [m×n] → [1×n] column means.
Tensor mean_rows(const Tensor& x);

// Per-row normalisation to zero mean / unit variance, then gain and bias.
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double epsilon = 1e-5);
// layer_norm_rows(x + sublayer_out, ...): the post-norm residual block.
Tensor layer_norm_residual(const Tensor& x, const Tensor& sublayer_out, const Tensor& gain,
                           const Tensor& bias, double epsilon = 1e-5);

std::size_t conv1d_output_length(std::size_t length, std::size_t window, std::size_t stride);
// input[c_in×L], weights[c_out×c_in×window], bias[c_out] (may be undefined).
Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              std::size_t stride = 2);

Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng);

// Mean over the batch of -log softmax(logits[i])[labels[i]], log-sum-exp
// stabilised. Returns a [1] tensor.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace afx::ops
