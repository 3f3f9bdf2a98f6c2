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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afx/dsp/waveform.hpp"
#include "afx/tensor/tensor.hpp"

namespace afx::model {

// Per-layer hidden states from some external encoder: values[(l * frames + t) * dim + k].
struct EmbeddingStack {
  std::string clip_id;
  std::string producer;
  std::size_t layers = 0;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  // Throws NotAStack when layers < 2, ShapeError on size mismatch and
  // NonFinite on NaN or infinite entries.
  void validate() const;
  Tensor layer(std::size_t index) const;  // 0-based, [frames × dim]
  bool operator==(const EmbeddingStack&) const = default;
};

enum class LayerMode { kMiddle, kAverage };

std::string_view layer_mode_name(LayerMode mode);  // "mid" / "avg"
LayerMode parse_layer_mode(std::string_view name);

// 1-based index ceil(L/2) of the layer Middle mode picks.
std::size_t middle_layer(std::size_t layers);

/// Middle: layer ceil(L/2) counting from 1. Average: elementwise mean of all
/// L layers.
Tensor select_embedding(const EmbeddingStack& stack, LayerMode mode);

// AFTX1 entry "embedding" [L × frames × dim] plus `<path>.json` with
// {clip_id, producer, layers}.
void write_embedding_stack(const std::filesystem::path& path, const EmbeddingStack& stack);
EmbeddingStack read_embedding_stack(const std::filesystem::path& path);

/// Hermetic stand-in for a self-supervised encoder: the waveform is cut into
/// 25 ms / 10 ms frames, and each layer is tanh of a fixed random projection
/// of the previous one. The projections depend only on `seed`.
EmbeddingStack random_projection_stack(const dsp::Waveform& wave, std::size_t layers, std::size_t dim,
                                       std::uint64_t seed);

struct PlantedStackSpec {
  std::size_t layers = 12;
  std::size_t frames = 20;
  std::size_t dim = 16;
  double signal = 1.0;        // label offset along a fixed direction, signal layer only
  double signal_noise = 0.3;  // clip-level nuisance in the signal layer
  double other_noise = 3.0;   // clip-level nuisance in every other layer
  double frame_noise = 0.5;   // per-frame noise in every layer
  std::uint64_t seed = 0;
};

/// Stacks whose label signal lives only in layer ceil(L/2). Every other layer
/// carries large clip-level nuisance, so averaging the layers buries the
/// signal while the middle layer keeps it.
std::vector<EmbeddingStack> planted_layer_stacks(std::span<const std::string> clip_ids, std::span<const int> labels,
                                                 const PlantedStackSpec& spec);

}  // namespace afx::model
