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

#include "afx/model/embedding.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "afx/error.hpp"
#include "afx/model/ser.hpp"
#include "afx/tensor/container.hpp"
#include "json.hpp"

namespace afx::model {

void EmbeddingStack::validate() const {
  if (layers < 2) fail(ErrorCode::kNotAStack, clip_id + ": " + std::to_string(layers) + " layer(s) is not a stack");
  if (values.size() != layers * frames * dim || frames == 0 || dim == 0) {
    fail(ErrorCode::kShapeError, clip_id + ": embedding values do not match [L x frames x dim]");
  }
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, clip_id + ": non-finite embedding value");
  }
}

Tensor EmbeddingStack::layer(std::size_t index) const {
  if (index >= layers) fail(ErrorCode::kInvalidArgument, "layer index out of range");
  const auto begin = values.begin() + static_cast<std::ptrdiff_t>(index * frames * dim);
  return Tensor({frames, dim}, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(frames * dim)));
}

std::string_view layer_mode_name(LayerMode mode) { return mode == LayerMode::kMiddle ? "mid" : "avg"; }

LayerMode parse_layer_mode(std::string_view name) {
  if (name == "mid" || name == "middle") return LayerMode::kMiddle;
  if (name == "avg" || name == "average") return LayerMode::kAverage;
  fail(ErrorCode::kInvalidArgument, "unknown layer mode '" + std::string(name) + "'");
}

std::size_t middle_layer(std::size_t layers) { return (layers + 1) / 2; }

Tensor select_embedding(const EmbeddingStack& stack, LayerMode mode) {
  stack.validate();
  if (mode == LayerMode::kMiddle) return stack.layer(middle_layer(stack.layers) - 1);
  const std::size_t n = stack.frames * stack.dim;
  std::vector<double> mean(n, 0.0);
  for (std::size_t l = 0; l < stack.layers; ++l) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += stack.values[l * n + i];
  }
  for (double& v : mean) v /= static_cast<double>(stack.layers);
  return Tensor({stack.frames, stack.dim}, std::move(mean));
}

void write_embedding_stack(const std::filesystem::path& path, const EmbeddingStack& stack) {
  stack.validate();
  std::vector<ContainerEntry> entries{{"embedding", {stack.layers, stack.frames, stack.dim}, false, stack.values}};
  write_container(path, entries);
  nlohmann::ordered_json sidecar{{"clip_id", stack.clip_id}, {"producer", stack.producer}, {"layers", stack.layers}};
  std::ofstream out(path.string() + ".json");
  if (!out) fail(ErrorCode::kIoError, "cannot write sidecar for " + path.string());
  out << sidecar.dump(2) << "\n";
}

EmbeddingStack read_embedding_stack(const std::filesystem::path& path) {
  const auto entries = read_container(path);
  const ContainerEntry& e = find_entry(entries, "embedding");
  if (e.shape.size() != 3) fail(ErrorCode::kNotAStack, path.string() + ": embedding entry must be [L x frames x dim]");
  EmbeddingStack s;
  s.layers = e.shape[0];
  s.frames = e.shape[1];
  s.dim = e.shape[2];
  s.values = e.values;
  std::ifstream in(path.string() + ".json");
  if (!in) fail(ErrorCode::kFormatError, "missing sidecar " + path.string() + ".json");
  try {
    const auto j = nlohmann::json::parse(in);
    s.clip_id = j.at("clip_id").get<std::string>();
    s.producer = j.value("producer", "");
    if (j.at("layers").get<std::size_t>() != s.layers) {
      fail(ErrorCode::kFormatError, path.string() + ": sidecar layer count disagrees with the container");
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kFormatError, path.string() + ".json: " + ex.what());
  }
  s.validate();
  return s;
}

EmbeddingStack random_projection_stack(const dsp::Waveform& wave, std::size_t layers, std::size_t dim,
                                       std::uint64_t seed) {
  const std::size_t frame = static_cast<std::size_t>(wave.sample_rate) * 25 / 1000;
  const std::size_t shift = static_cast<std::size_t>(wave.sample_rate) * 10 / 1000;
  if (wave.samples.size() < frame) fail(ErrorCode::kInputTooShort, wave.source_id + " is shorter than one frame");
  const std::size_t frames = (wave.samples.size() - frame) / shift + 1;

  EmbeddingStack s;
  s.clip_id = wave.source_id;
  s.producer = "random-projection-stub";
  s.layers = layers;
  s.frames = frames;
  s.dim = dim;
  s.values.resize(layers * frames * dim);
  std::mt19937_64 rng(seed);
  std::vector<double> prev, next(dim);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? frame : dim;
    const Tensor w = glorot_uniform({dim, in}, in, dim, rng);
    const auto wd = w.data();
    for (std::size_t t = 0; t < frames; ++t) {
      const double* x = l == 0 ? wave.samples.data() + t * shift : s.values.data() + ((l - 1) * frames + t) * dim;
      for (std::size_t k = 0; k < dim; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < in; ++i) acc += wd[k * in + i] * x[i];
        s.values[(l * frames + t) * dim + k] = std::tanh(l == 0 ? 4.0 * acc : acc);
      }
    }
  }
  return s;
}

std::vector<EmbeddingStack> planted_layer_stacks(std::span<const std::string> clip_ids, std::span<const int> labels,
                                                 const PlantedStackSpec& spec) {
  if (clip_ids.size() != labels.size()) fail(ErrorCode::kShapeError, "one label per clip id required");
  if (spec.layers < 2) fail(ErrorCode::kNotAStack, "planted stacks need at least two layers");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> direction(spec.dim);
  double norm = 0.0;
  for (double& v : direction) {
    v = normal(rng);
    norm += v * v;
  }
  for (double& v : direction) v /= std::sqrt(norm);

  const std::size_t signal_layer = middle_layer(spec.layers) - 1;
  std::vector<EmbeddingStack> out;
  for (std::size_t c = 0; c < clip_ids.size(); ++c) {
    EmbeddingStack s;
    s.clip_id = clip_ids[c];
    s.producer = "planted-layer-stub";
    s.layers = spec.layers;
    s.frames = spec.frames;
    s.dim = spec.dim;
    s.values.resize(spec.layers * spec.frames * spec.dim);
    const double sign = labels[c] ? 1.0 : -1.0;
    for (std::size_t l = 0; l < spec.layers; ++l) {
      const bool signal = l == signal_layer;
      std::vector<double> offset(spec.dim);
      for (std::size_t k = 0; k < spec.dim; ++k) {
        offset[k] = (signal ? spec.signal_noise : spec.other_noise) * normal(rng);
        if (signal) offset[k] += sign * spec.signal * direction[k];
      }
      for (std::size_t t = 0; t < spec.frames; ++t) {
        for (std::size_t k = 0; k < spec.dim; ++k) {
          s.values[(l * spec.frames + t) * spec.dim + k] = offset[k] + spec.frame_noise * normal(rng);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace afx::model
