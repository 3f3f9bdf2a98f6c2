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

#include "afx/model/ser.hpp"

#include <cmath>

#include "afx/error.hpp"
#include "afx/tensor/ops.hpp"
#include "json.hpp"

namespace afx::model {

namespace {

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

}  // namespace

void SerModelConfig::validate() const {
  if (d_model == 0 || num_heads == 0 || conv_layers == 0 || conv_window == 0 || conv_stride == 0 ||
      num_classes < 2 || head_hidden == 0 || ffn_hidden == 0) {
    fail(ErrorCode::kInvalidArgument, "model dimensions must be positive (two or more classes)");
  }
  if (d_model % num_heads != 0) {
    fail(ErrorCode::kHeadMismatch, "d_model " + std::to_string(d_model) + " is not divisible by " +
                                       std::to_string(num_heads) + " heads");
  }
  if (d_model % 2 != 0) fail(ErrorCode::kOddDimension, "positional encoding needs an even d_model");
}

std::string SerModelConfig::to_json() const {
  nlohmann::ordered_json j{{"d_model", d_model},         {"num_heads", num_heads},
                           {"num_encoder_layers", num_encoder_layers},
                           {"ffn_hidden", ffn_hidden},   {"conv_layers", conv_layers},
                           {"conv_window", conv_window}, {"conv_stride", conv_stride},
                           {"num_classes", num_classes}, {"head_hidden", head_hidden},
                           {"pooling", "mean"}};
  return j.dump();
}

SerModelConfig SerModelConfig::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SerModelConfig c;
    c.d_model = j.at("d_model");
    c.num_heads = j.at("num_heads");
    c.num_encoder_layers = j.at("num_encoder_layers");
    c.ffn_hidden = j.at("ffn_hidden");
    c.conv_layers = j.at("conv_layers");
    c.conv_window = j.at("conv_window");
    c.conv_stride = j.at("conv_stride");
    c.num_classes = j.at("num_classes");
    c.head_hidden = j.at("head_hidden");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("model config: ") + e.what());
  }
}

std::size_t min_input_length(const SerModelConfig& config) {
  std::size_t length = 1;
  for (std::size_t i = 0; i < config.conv_layers; ++i) length = (length - 1) * config.conv_stride + config.conv_window;
  return length;
}

std::size_t frames_after_convs(const SerModelConfig& config, std::size_t length) {
  for (std::size_t i = 0; i < config.conv_layers; ++i) {
    length = ops::conv1d_output_length(length, config.conv_window, config.conv_stride);
  }
  return length;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = u(rng);
  return Tensor(std::move(shape), std::move(data));
}

ClassifierHead ClassifierHead::create(ParameterSet& params, std::string prefix, std::size_t in, std::size_t hidden,
                                      std::size_t classes, std::uint64_t seed) {
  ClassifierHead h;
  h.prefix_ = std::move(prefix);
  h.in_ = in;
  h.hidden_ = hidden;
  h.classes_ = classes;
  h.w1_ = params.add(h.prefix_ + ".linear1.weight", Tensor::zeros({hidden, in}));
  h.b1_ = params.add(h.prefix_ + ".linear1.bias", Tensor::zeros({hidden}));
  h.w2_ = params.add(h.prefix_ + ".linear2.weight", Tensor::zeros({classes, hidden}));
  h.b2_ = params.add(h.prefix_ + ".linear2.bias", Tensor::zeros({classes}));
  h.reinitialize(seed);
  return h;
}

void ClassifierHead::reinitialize(std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, name_hash(prefix_)));
  const Tensor w1 = glorot_uniform({hidden_, in_}, in_, hidden_, rng);
  const Tensor w2 = glorot_uniform({classes_, hidden_}, hidden_, classes_, rng);
  std::copy(w1.data().begin(), w1.data().end(), w1_.mutable_data().begin());
  std::copy(w2.data().begin(), w2.data().end(), w2_.mutable_data().begin());
  std::fill(b1_.mutable_data().begin(), b1_.mutable_data().end(), 0.0);
  std::fill(b2_.mutable_data().begin(), b2_.mutable_data().end(), 0.0);
}

void ClassifierHead::zero() {
  for (Tensor* t : {&w1_, &b1_, &w2_, &b2_}) {
    auto d = t->mutable_data();
    std::fill(d.begin(), d.end(), 0.0);
  }
}

Tensor ClassifierHead::forward(const Tensor& features) const {
  return ops::linear(ops::relu(ops::linear(features, w1_, b1_)), w2_, b2_);
}

Tensor ClassifierHead::forward(const Tensor& features, double dropout, bool training, std::mt19937_64& rng) const {
  const Tensor hidden = ops::dropout(ops::relu(ops::linear(features, w1_, b1_)), dropout, training, rng);
  return ops::linear(hidden, w2_, b2_);
}

bool is_head_parameter(const Parameter& p) { return p.name().starts_with("head"); }

TransformerSer::TransformerSer(SerModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = config_.d_model, win = config_.conv_window;
  for (std::size_t i = 0; i < config_.conv_layers; ++i) {
    const std::size_t cin = i == 0 ? 1 : d;
    const std::string p = "cnn." + std::to_string(i);
    conv_w_.push_back(params_.add(p + ".weight", glorot_uniform({d, cin, win}, cin * win, d * win, rng)));
    conv_b_.push_back(params_.add(p + ".bias", Tensor::zeros({d})));
  }
  auto square = [&](const std::string& name, std::size_t out, std::size_t in) {
    return params_.add(name, glorot_uniform({out, in}, in, out, rng));
  };
  for (std::size_t l = 0; l < config_.num_encoder_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    Layer layer;
    layer.mha.q_weight = square(p + ".mha.q_proj.weight", d, d);
    layer.mha.q_bias = params_.add(p + ".mha.q_proj.bias", Tensor::zeros({d}));
    layer.mha.k_weight = square(p + ".mha.k_proj.weight", d, d);
    layer.mha.k_bias = params_.add(p + ".mha.k_proj.bias", Tensor::zeros({d}));
    layer.mha.v_weight = square(p + ".mha.v_proj.weight", d, d);
    layer.mha.v_bias = params_.add(p + ".mha.v_proj.bias", Tensor::zeros({d}));
    layer.mha.out_weight = square(p + ".mha.out_proj.weight", d, d);
    layer.mha.out_bias = params_.add(p + ".mha.out_proj.bias", Tensor::zeros({d}));
    layer.norm1_gain = params_.add(p + ".norm1.gain", Tensor::full({d}, 1.0));
    layer.norm1_bias = params_.add(p + ".norm1.bias", Tensor::zeros({d}));
    layer.ffn_w1 = square(p + ".ffn.linear1.weight", config_.ffn_hidden, d);
    layer.ffn_b1 = params_.add(p + ".ffn.linear1.bias", Tensor::zeros({config_.ffn_hidden}));
    layer.ffn_w2 = square(p + ".ffn.linear2.weight", d, config_.ffn_hidden);
    layer.ffn_b2 = params_.add(p + ".ffn.linear2.bias", Tensor::zeros({d}));
    layer.norm2_gain = params_.add(p + ".norm2.gain", Tensor::full({d}, 1.0));
    layer.norm2_bias = params_.add(p + ".norm2.bias", Tensor::zeros({d}));
    layers_.push_back(std::move(layer));
  }
  head_ = ClassifierHead::create(params_, "head", d, config_.head_hidden, config_.num_classes, mix_seed(seed, 1));
}

Tensor TransformerSer::encode(const Tensor& clip) const {
  if (clip.rank() != 2 || clip.dim(0) != 1) {
    fail(ErrorCode::kShapeError, "expected a [1 x samples] clip, got " + shape_string(clip.shape()));
  }
  Tensor h = clip;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    h = ops::conv1d(h, conv_w_[i], conv_b_[i], config_.conv_stride);
    // ReLU between conv layers; the last conv output goes straight to the encoder.
    if (i + 1 < conv_w_.size()) h = ops::relu(h);
  }
  h = ops::transpose(h);
  h = ops::add(h, nn::positional_encoding(h.dim(0), config_.d_model));
  for (const Layer& layer : layers_) {
    auto attn = nn::multi_head_attention(h, layer.mha, config_.num_heads);
    h = ops::layer_norm_residual(h, attn.output, layer.norm1_gain, layer.norm1_bias);
    const Tensor ff = nn::feed_forward(h, layer.ffn_w1, layer.ffn_b1, layer.ffn_w2, layer.ffn_b2);
    h = ops::layer_norm_residual(h, ff, layer.norm2_gain, layer.norm2_bias);
  }
  return h;
}

Tensor TransformerSer::pooled(const Tensor& clip) const { return ops::mean_rows(encode(clip)); }

Tensor TransformerSer::forward(const Tensor& clip) const { return head_.forward(pooled(clip)); }

Tensor TransformerSer::forward_batch(std::span<const Tensor> clips) const {
  std::vector<Tensor> rows;
  rows.reserve(clips.size());
  for (const Tensor& c : clips) rows.push_back(pooled(c));
  return head_.forward(ops::stack_rows(rows));
}

void TransformerSer::freeze_backbone(std::uint64_t head_seed) {
  params_.set_trainable_where([](const Parameter& p) { return !is_head_parameter(p); }, false);
  params_.set_trainable_where(is_head_parameter, true);
  head_.reinitialize(head_seed);
}

MultitaskHead::MultitaskHead(std::size_t in, std::size_t hidden, std::size_t classes, std::uint64_t seed_a,
                             std::uint64_t seed_b) {
  a_ = ClassifierHead::create(params_, "head", in, hidden, classes, seed_a);
  b_ = ClassifierHead::create(params_, "head_b", in, hidden, classes, seed_b);
}

Tensor multitask_loss(const Tensor& logits_a, const Tensor& logits_b, std::span<const int> labels_a,
                      std::span<const int> labels_b) {
  if (labels_a.size() != logits_a.dim(0) || labels_b.size() != logits_b.dim(0)) {
    fail(ErrorCode::kLabelError, "multitask batch needs one label per row for both tasks");
  }
  return ops::add(ops::softmax_cross_entropy(logits_a, labels_a), ops::softmax_cross_entropy(logits_b, labels_b));
}

Tensor forward_embedding_head(const Tensor& features, const ClassifierHead& head) {
  if (features.rank() != 2 || features.dim(1) != head.in_features()) {
    fail(ErrorCode::kShapeError, "features " + shape_string(features.shape()) + " do not match a head of width " +
                                     std::to_string(head.in_features()));
  }
  return head.forward(ops::mean_rows(features));
}

AugmentBaseline::AugmentBaseline(SerModelConfig config, std::size_t mel_bins, std::uint64_t seed, double dropout)
    : config_(config), mel_bins_(mel_bins), dropout_(dropout) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = config_.d_model, win = config_.conv_window;
  for (std::size_t i = 0; i < config_.conv_layers; ++i) {
    const std::size_t cin = i == 0 ? mel_bins : d;
    const std::string p = "cnn." + std::to_string(i);
    conv_w_.push_back(params_.add(p + ".weight", glorot_uniform({d, cin, win}, cin * win, d * win, rng)));
    conv_b_.push_back(params_.add(p + ".bias", Tensor::zeros({d})));
  }
  head_ = ClassifierHead::create(params_, "head", d, config_.head_hidden, config_.num_classes, mix_seed(seed, 1));
}

Tensor AugmentBaseline::forward(const Tensor& spectrogram, bool training, std::mt19937_64& rng) const {
  if (spectrogram.rank() != 2 || spectrogram.dim(0) != mel_bins_) {
    fail(ErrorCode::kShapeError, "expected [" + std::to_string(mel_bins_) + " x frames], got " +
                                     shape_string(spectrogram.shape()));
  }
  Tensor h = spectrogram;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    h = ops::relu(ops::conv1d(h, conv_w_[i], conv_b_[i], config_.conv_stride));
    h = ops::dropout(h, dropout_, training, rng);
  }
  return head_.forward(ops::mean_rows(ops::transpose(h)), dropout_, training, rng);
}

}  // namespace afx::model
