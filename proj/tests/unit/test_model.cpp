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

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "afx/corpus/synthetic.hpp"
#include "afx/error.hpp"
#include "afx/model/embedding.hpp"
#include "afx/model/ser.hpp"
#include "afx/tensor/adamw.hpp"
#include "afx/tensor/container.hpp"
#include "afx/tensor/ops.hpp"
#include "doctest.h"
#include "grad_check.hpp"
#include "grad_suite.hpp"

using namespace afx;
using namespace afx::model;

namespace {

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    FAIL("expected " << error_code_name(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

SerModelConfig tiny_config() {
  SerModelConfig c;
  c.d_model = 8;
  c.num_heads = 2;
  c.conv_layers = 1;
  c.ffn_hidden = 16;
  c.head_hidden = 4;
  return c;
}

Tensor random_clip(std::size_t samples, std::mt19937_64& rng, double amplitude = 0.5) {
  return testing::random_tensor({1, samples}, rng, -amplitude, amplitude, false);
}

std::vector<double> softmax2(std::span<const double> z) {
  const double m = std::max(z[0], z[1]);
  const double a = std::exp(z[0] - m), b = std::exp(z[1] - m);
  return {a / (a + b), b / (a + b)};
}

}  // namespace

TEST_CASE("model config") {
  SerModelConfig c;
  CHECK(c.d_model == 64);
  CHECK(c.num_heads == 8);
  CHECK(c.num_encoder_layers == 1);
  CHECK(min_input_length(c) == 31);
  CHECK(frames_after_convs(c, 2048) == 127);
  CHECK(SerModelConfig::from_json(c.to_json()) == c);
  c.d_model = 60;
  expect_error(ErrorCode::kHeadMismatch, [&] { c.validate(); });
}

TEST_CASE("transformer forward contract") {
  TransformerSer m({}, 3);
  std::mt19937_64 rng(1);
  for (std::size_t n : {31u, 100u, 777u}) {
    const Tensor logits = m.forward(random_clip(n, rng));
    CHECK(logits.shape() == Shape{1, 2});
  }
  expect_error(ErrorCode::kInputTooShort, [&] { m.forward(random_clip(30, rng)); });

  m.head().zero();
  const Tensor logits = m.forward(random_clip(400, rng));
  CHECK(logits.data()[0] == 0.0);
  CHECK(logits.data()[1] == 0.0);
  const auto p = softmax2(logits.data());
  CHECK(p[0] == 0.5);
}

TEST_CASE("inputs in [-1, 1] give finite, continuous outputs") {
  TransformerSer m({}, 4);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor clip = random_clip(512, rng, 1.0);
    const Tensor a = m.forward(clip);
    for (double v : a.data()) CHECK(std::isfinite(v));
    std::vector<double> nudged(clip.data().begin(), clip.data().end());
    for (double& v : nudged) v *= 1.0 - 1e-6;
    const Tensor b = m.forward(Tensor({1, 512}, nudged));
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(a.data()[k] - b.data()[k]) < 1e-3);
  }
}

// The key-projection bias has an exactly zero gradient (softmax ignores a
// per-row constant), so its central difference is pure forward roundoff over
// 2h. It gets an absolute check; every other parameter the relative one.
TEST_CASE("tiny model end-to-end gradients match central differences") {
  const auto report = testing::tiny_model_gradient_suite(20);
  CHECK(report.worst_rel < 1e-4);
  CHECK(report.key_bias_analytic < 1e-12);
  CHECK(report.key_bias_numeric < 1e-9);
  MESSAGE("worst relative error " << report.worst_rel);
}

TEST_CASE("swapping output units and labels leaves the loss unchanged") {
  TransformerSer m({}, 5);
  std::mt19937_64 rng(5);
  std::vector<Tensor> clips;
  for (int i = 0; i < 4; ++i) clips.push_back(random_clip(200, rng));
  std::vector<int> labels{0, 1, 1, 0}, swapped{1, 0, 0, 1};
  const double before = ops::softmax_cross_entropy(m.forward_batch(clips), labels).item();
  auto w = m.params().get("head.linear2.weight").tensor().mutable_data();
  const std::size_t hidden = w.size() / 2;
  std::swap_ranges(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(hidden), w.begin() + static_cast<std::ptrdiff_t>(hidden));
  auto b = m.params().get("head.linear2.bias").tensor().mutable_data();
  std::swap(b[0], b[1]);
  const double after = ops::softmax_cross_entropy(m.forward_batch(clips), swapped).item();
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("training reduces the loss") {
  TransformerSer m({}, 6);
  std::mt19937_64 rng(6);
  std::vector<Tensor> clips;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    clips.push_back(random_clip(256, rng, i % 2 ? 0.6 : 0.1));
    labels.push_back(i % 2);
  }
  AdamW opt;
  const double initial = ops::softmax_cross_entropy(m.forward_batch(clips), labels).item();
  double last = initial;
  for (int step = 0; step < 50; ++step) {
    m.params().zero_grad();
    Tensor loss = ops::softmax_cross_entropy(m.forward_batch(clips), labels);
    last = loss.item();
    loss.backward();
    opt.step(m.params());
  }
  CHECK(last < initial);
}

TEST_CASE("freezing the backbone") {
  TransformerSer m({}, 7);
  const std::string backbone_before = parameter_digest(m.params(), [](const Parameter& p) { return !is_head_parameter(p); });
  const std::vector<double> head_before(m.params().get("head.linear1.weight").tensor().data().begin(),
                                        m.params().get("head.linear1.weight").tensor().data().end());
  m.freeze_backbone(99);
  CHECK(m.params().trainable_scalars() == m.params().scalars_where(is_head_parameter));
  CHECK(m.params().trainable_scalars() == 64 * 32 + 32 + 32 * 2 + 2);
  const auto head_after = m.params().get("head.linear1.weight").tensor().data();
  CHECK(!std::equal(head_before.begin(), head_before.end(), head_after.begin()));

  std::mt19937_64 rng(7);
  std::vector<Tensor> clips{random_clip(128, rng), random_clip(128, rng)};
  std::vector<int> labels{0, 1};
  AdamW opt({1e-2, 1e-5});
  for (int step = 0; step < 100; ++step) {
    m.params().zero_grad();
    Tensor loss = ops::softmax_cross_entropy(m.forward_batch(clips), labels);
    loss.backward();
    if (step == 0) {
      for (const Parameter& p : m.params().all()) CHECK(p.tensor().has_grad() == is_head_parameter(p));
    }
    opt.step(m.params());
  }
  CHECK(parameter_digest(m.params(), [](const Parameter& p) { return !is_head_parameter(p); }) == backbone_before);
}

TEST_CASE("a head on a frozen random backbone separates loud from quiet clips") {
  corpus::SyntheticSpec spec;
  spec.num_clips = 32;
  spec.seed = 8;
  const auto c = corpus::generate_synthetic_corpus(spec);
  TransformerSer m({}, 8);
  m.freeze_backbone(8);
  std::vector<Tensor> pooled;
  for (const auto& w : c.waveforms) pooled.push_back(m.pooled(Tensor({1, w.samples.size()}, w.samples)).detach());
  const Tensor features = ops::stack_rows(pooled);
  AdamW opt({1e-3, 1e-5});
  for (int step = 0; step < 300; ++step) {
    m.params().zero_grad();
    Tensor loss = ops::softmax_cross_entropy(m.head().forward(features), c.latent);
    loss.backward();
    opt.step(m.params());
  }
  const Tensor logits = m.head().forward(features);
  int correct = 0;
  for (std::size_t i = 0; i < c.latent.size(); ++i) {
    correct += (logits.at(i, 1) > logits.at(i, 0)) == (c.latent[i] == 1);
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(c.latent.size()) > 0.9);
}

TEST_CASE("select_embedding") {
  auto stack_of = [](std::size_t layers, std::size_t frames, std::size_t dim, auto value) {
    EmbeddingStack s;
    s.clip_id = "c";
    s.layers = layers;
    s.frames = frames;
    s.dim = dim;
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t i = 0; i < frames * dim; ++i) s.values.push_back(value(l, i));
    return s;
  };
  const auto s24 = stack_of(24, 3, 4, [](std::size_t l, std::size_t i) { return 100.0 * l + i; });
  CHECK(middle_layer(24) == 12);
  CHECK(middle_layer(5) == 3);
  CHECK(select_embedding(s24, LayerMode::kMiddle).data()[0] == 1100.0);

  const auto same = stack_of(6, 3, 4, [](std::size_t, std::size_t i) { return 0.25 * i; });
  const Tensor mid = select_embedding(same, LayerMode::kMiddle), avg = select_embedding(same, LayerMode::kAverage);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(mid.data()[i] == 0.25 * i);
    CHECK(avg.data()[i] == 0.25 * i);
  }
  const auto two = stack_of(2, 2, 3, [](std::size_t l, std::size_t i) { return l ? -3.0 * i : 1.0 * i + 1; });
  const Tensor a2 = select_embedding(two, LayerMode::kAverage);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a2.data()[i] == doctest::Approx((1.0 * i + 1 - 3.0 * i) / 2));
  expect_error(ErrorCode::kNotAStack, [&] { select_embedding(stack_of(1, 2, 2, [](auto, auto) { return 0.0; }), LayerMode::kMiddle); });
}

TEST_CASE("embedding head") {
  ParameterSet params;
  const ClassifierHead head = ClassifierHead::create(params, "head", 4, 3, 2, 11);
  Tensor constant({5, 4}, std::vector<double>(20, 0.7));
  const Tensor direct = head.forward(Tensor({1, 4}, std::vector<double>(4, 0.7)));
  const Tensor pooled = forward_embedding_head(constant, head);
  CHECK(pooled.shape() == Shape{1, 2});
  for (std::size_t k = 0; k < 2; ++k) CHECK(pooled.data()[k] == doctest::Approx(direct.data()[k]).epsilon(1e-14));
  Tensor single({1, 4}, {0.1, -0.2, 0.3, 0.9});
  const Tensor one = forward_embedding_head(single, head), ref = head.forward(single);
  for (std::size_t k = 0; k < 2; ++k) CHECK(one.data()[k] == ref.data()[k]);
  expect_error(ErrorCode::kShapeError, [&] { forward_embedding_head(Tensor::zeros({2, 5}), head); });
}

TEST_CASE("augmentation baseline dropout") {
  SerModelConfig config;
  config.d_model = 16;
  config.num_heads = 2;
  AugmentBaseline net(config, 10, 1);
  std::mt19937_64 data_rng(1);
  const Tensor spec = testing::random_tensor({10, 40}, data_rng, -5, 5, false);
  std::mt19937_64 r1(5), r2(5), r3(6);
  const Tensor i1 = net.forward(spec, false, r1), i2 = net.forward(spec, false, r3);
  CHECK(std::equal(i1.data().begin(), i1.data().end(), i2.data().begin()));
  std::mt19937_64 a(5), b(5);
  const Tensor t1 = net.forward(spec, true, a), t2 = net.forward(spec, true, b);
  CHECK(std::equal(t1.data().begin(), t1.data().end(), t2.data().begin()));
  const int label = 1;
  std::mt19937_64 c(7);
  const double l1 = ops::softmax_cross_entropy(net.forward(spec, true, r2), std::span(&label, 1)).item();
  const double l2 = ops::softmax_cross_entropy(net.forward(spec, true, c), std::span(&label, 1)).item();
  CHECK(l1 != l2);
  expect_error(ErrorCode::kShapeError, [&] { net.forward(Tensor::zeros({9, 40}), false, a); });
}

TEST_CASE("multitask loss") {
  const Tensor zeros = Tensor::zeros({1, 2});
  const std::vector<int> one{1}, zero{0};
  CHECK(multitask_loss(zeros, zeros, one, zero).item() == doctest::Approx(1.386294).epsilon(1e-6));

  const Tensor a({1, 2}, {0.3, -0.4});
  const Tensor confident({1, 2}, {-50.0, 50.0});
  CHECK(multitask_loss(a, confident, zero, one).item() ==
        doctest::Approx(ops::softmax_cross_entropy(a, zero).item()).epsilon(1e-12));

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor la = testing::random_tensor({6, 2}, rng, -3, 3, false);
    const Tensor lb = testing::random_tensor({6, 2}, rng, -3, 3, false);
    std::vector<int> ya(6), yb(6);
    for (int& y : ya) y = static_cast<int>(rng() % 2);
    for (int& y : yb) y = static_cast<int>(rng() % 2);
    // Independent recomputation of both terms.
    double expected = 0.0;
    for (const auto& [logits, labels] : {std::pair{&la, &ya}, std::pair{&lb, &yb}}) {
      double term = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        const double z0 = logits->at(i, 0), z1 = logits->at(i, 1);
        const double m = std::max(z0, z1);
        const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
        term += lse - ((*labels)[i] ? z1 : z0);
      }
      expected += term / 6.0;
    }
    CHECK(std::abs(multitask_loss(la, lb, ya, yb).item() - expected) <= 1e-12);
  }
  expect_error(ErrorCode::kLabelError, [&] { multitask_loss(zeros, zeros, one, {}); });

  MultitaskHead mt(8, 4, 2, 1, 2);
  ParameterSet single;
  const ClassifierHead ref = ClassifierHead::create(single, "head", 8, 4, 2, 1);
  const Tensor x = testing::random_tensor({3, 8}, rng, -1, 1, false);
  const Tensor ya = mt.task_a().forward(x), yr = ref.forward(x);
  CHECK(std::equal(ya.data().begin(), ya.data().end(), yr.data().begin()));
  CHECK(mt.params().size() == 8);
}

TEST_CASE("embedding stack files and stub producers") {
  dsp::Waveform w{std::vector<double>(2048, 0.0), 16000, "clip_1"};
  for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = 0.3 * std::sin(0.05 * static_cast<double>(i));
  const EmbeddingStack s = random_projection_stack(w, 6, 16, 3);
  CHECK(s.layers == 6);
  CHECK(s.frames == 11);
  s.validate();
  CHECK(random_projection_stack(w, 6, 16, 3) == s);

  const auto path = std::filesystem::temp_directory_path() / "afx_stack.aftx";
  write_embedding_stack(path, s);
  CHECK(read_embedding_stack(path) == s);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");

  std::vector<std::string> ids{"a", "b"};
  std::vector<int> labels{1, 0};
  PlantedStackSpec spec;
  spec.layers = 5;
  spec.frame_noise = 0.0;
  spec.signal_noise = 0.0;
  const auto planted = planted_layer_stacks(ids, labels, spec);
  const Tensor ma = select_embedding(planted[0], LayerMode::kMiddle), mb = select_embedding(planted[1], LayerMode::kMiddle);
  for (std::size_t k = 0; k < spec.dim; ++k) CHECK(ma.at(0, k) == doctest::Approx(-mb.at(0, k)));
}
