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
#include <numeric>

#include "afx/error.hpp"
#include "afx/tensor/nn.hpp"
#include "afx/tensor/ops.hpp"
#include "doctest.h"
#include "grad_check.hpp"
#include "grad_suite.hpp"

using namespace afx;
using afx::testing::check_gradients;
using afx::testing::projected_sum;
using afx::testing::random_attention;
using afx::testing::random_tensor;

namespace {

constexpr int kInstances = 20;
constexpr double kGradTol = 1e-4;

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    FAIL("expected " << error_code_name(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

nn::AttentionWeights identity_attention(std::size_t dim) {
  std::vector<double> eye(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) eye[i * dim + i] = 1.0;
  auto w = [&] { return Tensor({dim, dim}, eye); };
  auto b = [&] { return Tensor::zeros({dim}); };
  return {w(), b(), w(), b(), w(), b(), w(), b()};
}

}  // namespace

TEST_CASE("conv1d output length and linearity") {
  CHECK(ops::conv1d_output_length(3, 3, 2) == 1);
  CHECK(ops::conv1d_output_length(11, 3, 2) == 5);

  std::mt19937_64 rng(1);
  Tensor w = random_tensor({4, 1, 3}, rng);
  Tensor out = ops::conv1d(Tensor::zeros({1, 11}), w, Tensor::zeros({4}), 2);
  CHECK(out.shape() == Shape{4, 5});
  for (double v : out.data()) CHECK(v == 0.0);

  expect_error(ErrorCode::kInputTooShort, [&] { ops::conv1d(Tensor::zeros({1, 2}), w, Tensor(), 2); });
  expect_error(ErrorCode::kShapeError, [&] { ops::conv1d(Tensor::zeros({2, 8}), w, Tensor(), 2); });
}

TEST_CASE("conv1d matches a direct sum") {
  Tensor x({1, 5}, {1, 2, 3, 4, 5});
  Tensor w({1, 1, 3}, {1, 0, -1});
  Tensor out = ops::conv1d(x, w, Tensor({1}, {0.5}), 2);
  REQUIRE(out.shape() == Shape{1, 2});
  CHECK(out.data()[0] == doctest::Approx(1 - 3 + 0.5));
  CHECK(out.data()[1] == doctest::Approx(3 - 5 + 0.5));
}

TEST_CASE("positional encoding") {
  Tensor pe = nn::positional_encoding(4, 2);
  CHECK(pe.at(0, 0) == 0.0);
  CHECK(pe.at(0, 1) == 1.0);
  CHECK(pe.at(1, 0) == doctest::Approx(0.8414709848).epsilon(1e-9));

  Tensor big = nn::positional_encoding(50, 16);
  for (std::size_t j = 0; j < 16; ++j) CHECK(big.at(0, j) == (j % 2 == 0 ? 0.0 : 1.0));
  for (double v : big.data()) CHECK(std::abs(v) <= 1.0);

  expect_error(ErrorCode::kOddDimension, [] { nn::positional_encoding(4, 3); });
}

TEST_CASE("multi-head attention") {
  SUBCASE("single frame attends to itself with weight one") {
    std::mt19937_64 rng(3);
    Tensor x = random_tensor({1, 8}, rng, -1, 1, false);
    auto weights = random_attention(8, rng);
    auto result = nn::multi_head_attention(x, weights, 8);
    Tensor v = ops::linear(x, weights.v_weight, weights.v_bias);
    Tensor expected = ops::linear(v, weights.out_weight, weights.out_bias);
    for (std::size_t j = 0; j < 8; ++j) CHECK(result.output.data()[j] == doctest::Approx(expected.data()[j]));
    for (const Tensor& a : result.attention) CHECK(a.item() == 1.0);
  }

  SUBCASE("attention rows are stochastic") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < kInstances; ++trial) {
      Tensor x = random_tensor({7, 16}, rng, -3, 3, false);
      auto result = nn::multi_head_attention(x, random_attention(16, rng), 8);
      CHECK(result.attention.size() == 8);
      for (const Tensor& a : result.attention) {
        for (std::size_t i = 0; i < 7; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < 7; ++j) row += a.at(i, j);
          CHECK(std::abs(row - 1.0) < 1e-9);
        }
      }
    }
  }

  SUBCASE("two frames, one head, hand-evaluated closed form") {
    Tensor x({2, 2}, {1.0, 2.0, 3.0, -1.0});
    auto result = nn::multi_head_attention(x, identity_attention(2), 1);
    const double r2 = std::sqrt(2.0);
    const double x0[2] = {1.0, 2.0}, x1[2] = {3.0, -1.0};
    auto dot = [](const double* a, const double* b) { return a[0] * b[0] + a[1] * b[1]; };
    const double* rows[2] = {x0, x1};
    for (int i = 0; i < 2; ++i) {
      const double s0 = dot(rows[i], x0) / r2, s1 = dot(rows[i], x1) / r2;
      const double w0 = std::exp(s0) / (std::exp(s0) + std::exp(s1));
      const double w1 = 1.0 - w0;
      for (int j = 0; j < 2; ++j) {
        CHECK(result.output.at(i, j) == doctest::Approx(w0 * x0[j] + w1 * x1[j]).epsilon(1e-12));
      }
    }
  }

  expect_error(ErrorCode::kHeadMismatch, [] {
    std::mt19937_64 rng(5);
    nn::multi_head_attention(Tensor::zeros({3, 10}), random_attention(10, rng), 8);
  });
}

TEST_CASE("feed-forward") {
  Tensor x({2, 3}, {1, 2, 3, -1, 0, 4});
  Tensor z = nn::feed_forward(x, Tensor::zeros({12, 3}), Tensor::zeros({12}), Tensor::zeros({3, 12}),
                              Tensor::zeros({3}));
  for (double v : z.data()) CHECK(v == 0.0);

  // Hidden pre-activations all negative: output is b2 on every row.
  Tensor b2({3}, {0.5, -0.25, 2.0});
  Tensor dead = nn::feed_forward(Tensor({2, 3}, {1, 1, 1, 2, 2, 2}), Tensor::full({4, 3}, -1.0),
                                 Tensor::full({4}, -0.5), Tensor::full({3, 4}, 7.0), b2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(dead.at(i, j) == b2.data()[j]);

  Tensor one = nn::feed_forward(Tensor({1, 1}, {1.0}), Tensor({1, 1}, {2.0}), Tensor({1}, {-1.0}),
                                Tensor({1, 1}, {3.0}), Tensor({1}, {0.0}));
  CHECK(one.item() == doctest::Approx(3.0));

  expect_error(ErrorCode::kShapeError, [] {
    nn::feed_forward(Tensor::zeros({1, 3}), Tensor::zeros({4, 2}), Tensor::zeros({4}),
                     Tensor::zeros({3, 4}), Tensor::zeros({3}));
  });
}

TEST_CASE("layer norm over the residual sum") {
  std::mt19937_64 rng(6);
  // Output variance is var / (var + eps); frames with var >= 10 sit within 1e-6.
  Tensor x = random_tensor({5, 16}, rng, -10, 10, false);
  Tensor sub = random_tensor({5, 16}, rng, -10, 10, false);
  Tensor y = ops::layer_norm_residual(x, sub, Tensor::full({16}, 1.0), Tensor::zeros({16}));
  for (std::size_t i = 0; i < 5; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 16; ++j) mean += y.at(i, j);
    mean /= 16;
    for (std::size_t j = 0; j < 16; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
    var /= 16;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }

  Tensor flat = ops::layer_norm_residual(Tensor::full({1, 4}, 3.0), Tensor::zeros({1, 4}),
                                         Tensor::full({4}, 1.0), Tensor::zeros({4}));
  for (double v : flat.data()) CHECK(v == 0.0);

  Tensor ramp = ops::layer_norm_residual(Tensor({1, 3}, {1, 2, 3}), Tensor::zeros({1, 3}),
                                         Tensor::full({3}, 1.0), Tensor::zeros({3}));
  CHECK(ramp.data()[0] == doctest::Approx(-1.2247).epsilon(1e-3));
  CHECK(std::abs(ramp.data()[1]) < 1e-12);
  CHECK(ramp.data()[2] == doctest::Approx(1.2247).epsilon(1e-3));

  expect_error(ErrorCode::kShapeError, [] {
    ops::layer_norm_residual(Tensor::zeros({1, 3}), Tensor::zeros({1, 4}), Tensor::full({3}, 1.0),
                             Tensor::zeros({3}));
  });
}

TEST_CASE("softmax cross-entropy") {
  int zero = 0, one = 1;
  CHECK(ops::softmax_cross_entropy(Tensor({1, 2}, {0, 0}), std::span(&zero, 1)).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ops::softmax_cross_entropy(Tensor({1, 2}, {0, 0}), std::span(&one, 1)).item() ==
        doctest::Approx(0.693147).epsilon(1e-6));

  Tensor confident = ops::softmax_cross_entropy(Tensor({1, 2}, {1000, -1000}), std::span(&zero, 1));
  CHECK(std::isfinite(confident.item()));
  CHECK(confident.item() < 1e-12);

  CHECK(std::abs(ops::softmax_cross_entropy(Tensor({1, 2}, {1, 2}), std::span(&zero, 1)).item() -
                 1.313262) < 1e-5);

  int bad = 2;
  expect_error(ErrorCode::kLabelError,
               [&] { ops::softmax_cross_entropy(Tensor({1, 2}, {0, 0}), std::span(&bad, 1)); });
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(7);
  Tensor x = random_tensor({10, 10}, rng, -1, 1, false);
  CHECK(ops::dropout(x, 0.0, true, rng).node() == x.node());
  CHECK(ops::dropout(x, 0.9, false, rng).node() == x.node());

  Tensor ones = Tensor::full({1, 100000}, 1.0);
  std::mt19937_64 fixed(42);
  Tensor dropped = ops::dropout(ones, 0.5, true, fixed);
  const double zeros = static_cast<double>(std::count(dropped.data().begin(), dropped.data().end(), 0.0));
  CHECK(std::abs(zeros / 100000.0 - 0.5) < 0.01);
  for (double v : dropped.data()) CHECK((v == 0.0 || v == 2.0));

  expect_error(ErrorCode::kInvalidProbability, [&] { ops::dropout(x, 1.0, true, rng); });
}

TEST_CASE("backward basics") {
  Tensor x({3}, {1, -2, 5}, true);
  ops::sum(x).backward();
  for (double g : x.grad()) CHECK(g == 1.0);

  Tensor y({2}, {1, 2}, true);
  Tensor loss = ops::sum(ops::mul(y, y));
  loss.backward();
  CHECK(y.grad()[0] == 2.0);
  CHECK(y.grad()[1] == 4.0);

  expect_error(ErrorCode::kStaleGraph, [&] { loss.backward(); });

  // A fresh forward pass is fine again; leaf gradients accumulate.
  ops::sum(ops::mul(y, y)).backward();
  CHECK(y.grad()[1] == 8.0);
}

TEST_CASE("frozen leaves receive no gradient") {
  Tensor frozen({2}, {1, 2}, false);
  Tensor live({2}, {3, 4}, true);
  ops::sum(ops::mul(frozen, live)).backward();
  CHECK_FALSE(frozen.has_grad());
  CHECK(live.grad()[0] == 1.0);
}

TEST_CASE("gradients match central differences") {
  const auto report = afx::testing::op_gradient_suite(kInstances);
  for (const auto& [name, worst] : report.worst) {
    INFO(name);
    CHECK(worst < kGradTol);
  }
  CHECK(report.worst.size() == 21);
  MESSAGE("worst relative gradient error: " << report.overall());
}

TEST_CASE("bounded inputs stay finite") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < kInstances; ++trial) {
    Tensor x = random_tensor({6, 8}, rng, -1e3, 1e3);
    Tensor normed = ops::layer_norm_rows(x, Tensor::full({8}, 1.0), Tensor::zeros({8}));
    Tensor att = nn::multi_head_attention(x, random_attention(8, rng), 8).output;
    Tensor pooled = ops::mean_rows(ops::add(normed, att));
    Tensor logits = ops::linear(pooled, random_tensor({2, 8}, rng, -1e3, 1e3), Tensor());
    int label = trial % 2;
    Tensor loss = ops::softmax_cross_entropy(logits, std::span(&label, 1));
    loss.backward();
    CHECK(std::isfinite(loss.item()));
    for (double g : x.grad()) CHECK(std::isfinite(g));
  }
}

TEST_CASE("identical seeds give bit-identical results") {
  auto run = [] {
    std::mt19937_64 rng(99);
    Tensor x = random_tensor({5, 8}, rng);
    Tensor y = ops::dropout(nn::multi_head_attention(x, random_attention(8, rng), 4).output, 0.5, true, rng);
    return std::vector<double>(y.data().begin(), y.data().end());
  };
  CHECK(run() == run());
}
