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
#include <string>
#include <string_view>
#include <vector>

#include "afx/tensor/nn.hpp"
#include "afx/tensor/parameter.hpp"
#include "afx/tensor/tensor.hpp"

namespace afx::model {

struct SerModelConfig {
  std::size_t d_model = 64;
  std::size_t num_heads = 8;
  std::size_t num_encoder_layers = 1;
  std::size_t ffn_hidden = 256;
  std::size_t conv_layers = 4;
  std::size_t conv_window = 3;
  std::size_t conv_stride = 2;
  std::size_t num_classes = 2;
  std::size_t head_hidden = 32;

  void validate() const;  // HeadMismatch, OddDimension or InvalidArgument
  std::string to_json() const;
  static SerModelConfig from_json(std::string_view text);
  bool operator==(const SerModelConfig&) const = default;
};

// Shortest input the conv stack accepts.
std::size_t min_input_length(const SerModelConfig& config);
std::size_t frames_after_convs(const SerModelConfig& config, std::size_t length);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

/// Two linear layers with a ReLU between them. The tensors alias entries of a
/// ParameterSet named "<prefix>.linear1.weight" and so on.
class ClassifierHead {
 public:
  ClassifierHead() = default;
  static ClassifierHead create(ParameterSet& params, std::string prefix, std::size_t in, std::size_t hidden,
                               std::size_t classes, std::uint64_t seed);

  // Fresh Glorot weights and zero biases, in place.
  void reinitialize(std::uint64_t seed);
  void zero();

  // features[B × in] → logits[B × classes]
  Tensor forward(const Tensor& features) const;
  // Optional dropout on the hidden activations.
  Tensor forward(const Tensor& features, double dropout, bool training, std::mt19937_64& rng) const;

  const std::string& prefix() const { return prefix_; }
  std::size_t in_features() const { return in_; }

 private:
  std::string prefix_;
  std::size_t in_ = 0, hidden_ = 0, classes_ = 0;
  Tensor w1_, b1_, w2_, b2_;
};

bool is_head_parameter(const Parameter& p);

/// Waveform → conv stack → positional encoding → encoder layers (MHA and FFN
/// sublayers, each residual plus post-norm) → mean over frames → head.
class TransformerSer {
 public:
  TransformerSer(SerModelConfig config, std::uint64_t seed);
  // Copies would alias the same parameter tensors.
  TransformerSer(const TransformerSer&) = delete;
  TransformerSer& operator=(const TransformerSer&) = delete;
  TransformerSer(TransformerSer&&) = default;

  const SerModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  ClassifierHead& head() { return head_; }

  // clip[1 × samples] → [frames × d_model]. Throws InputTooShort.
  Tensor encode(const Tensor& clip) const;
  // → [1 × d_model]
  Tensor pooled(const Tensor& clip) const;
  // → logits [1 × num_classes]
  Tensor forward(const Tensor& clip) const;
  // Per-clip logits stacked into [B × num_classes].
  Tensor forward_batch(std::span<const Tensor> clips) const;

  // Everything except the head becomes non-trainable; the head is redrawn.
  void freeze_backbone(std::uint64_t head_seed);

 private:
  SerModelConfig config_;
  ParameterSet params_;
  std::vector<Tensor> conv_w_, conv_b_;
  struct Layer {
    nn::AttentionWeights mha;
    Tensor norm1_gain, norm1_bias;
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor norm2_gain, norm2_bias;
  };
  std::vector<Layer> layers_;
  ClassifierHead head_;
};

/// Shared trunk features feeding two independent heads "head" (task A) and
/// "head_b" (task B).
class MultitaskHead {
 public:
  MultitaskHead(std::size_t in, std::size_t hidden, std::size_t classes, std::uint64_t seed_a,
                std::uint64_t seed_b);
  ParameterSet& params() { return params_; }
  const ClassifierHead& task_a() const { return a_; }
  const ClassifierHead& task_b() const { return b_; }

 private:
  ParameterSet params_;
  ClassifierHead a_, b_;
};

// Unweighted sum of the two cross-entropies. LabelError when either label
// list does not cover its batch.
Tensor multitask_loss(const Tensor& logits_a, const Tensor& logits_b, std::span<const int> labels_a,
                      std::span<const int> labels_b);

// Mean-pool features[frames × dim] and evaluate the head.
Tensor forward_embedding_head(const Tensor& features, const ClassifierHead& head);

/// CNN classifier on spectrograms: the SER conv geometry applied along time
/// with the mel bins as input channels, mean-pooled, then the two-layer head.
/// Dropout follows every conv layer and the hidden linear layer.
class AugmentBaseline {
 public:
  AugmentBaseline(SerModelConfig config, std::size_t mel_bins, std::uint64_t seed, double dropout = 0.5);
  ParameterSet& params() { return params_; }
  const SerModelConfig& config() const { return config_; }
  std::size_t mel_bins() const { return mel_bins_; }

  // spectrogram[mel × frames] → logits [1 × num_classes]
  Tensor forward(const Tensor& spectrogram, bool training, std::mt19937_64& rng) const;

 private:
  SerModelConfig config_;
  std::size_t mel_bins_;
  double dropout_;
  ParameterSet params_;
  std::vector<Tensor> conv_w_, conv_b_;
  ClassifierHead head_;
};

}  // namespace afx::model
