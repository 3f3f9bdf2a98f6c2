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
#include <random>

#include "afx/error.hpp"
#include "afx/metrics/metrics.hpp"
#include "doctest.h"

using namespace afx;
using namespace afx::metrics;
using corpus::Trait;

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

ConfusionMatrix cm(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  ConfusionMatrix m;
  m.counts = {{{a, b}, {c, d}}};
  return m;
}

// Recall per class by walking the samples, no confusion matrix involved.
double uar_oracle(const std::vector<int>& truth, const std::vector<int>& pred) {
  double total = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    int hits = 0, seen = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != cls) continue;
      ++seen;
      hits += pred[i] == cls;
    }
    total += static_cast<double>(hits) / seen;
  }
  return total / 2;
}

// Textbook two-pass correlation in extended precision.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double num = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(num / std::sqrt(vx * vy));
}

std::vector<int> random_bits(std::size_t n, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution b(p);
  std::vector<int> v(n);
  for (int& x : v) x = b(rng);
  return v;
}

}  // namespace

TEST_CASE("uar hand cases") {
  CHECK(uar(cm(10, 0, 0, 10)) == 1.0);
  CHECK(uar(cm(8, 2, 3, 7)) == 0.75);
  CHECK(uar(cm(13, 0, 4, 0)) == 0.5);
  expect_error(ErrorCode::kUndefinedRecall, [] { uar(cm(0, 0, 3, 4)); });
  for (std::uint64_t a = 1; a < 10; ++a)
    for (std::uint64_t b = 0; b < 10; ++b)
      CHECK(std::abs(uar(cm(a, b, b, a)) - static_cast<double>(a) / static_cast<double>(a + b)) <= 1e-15);
}

TEST_CASE("uar matches the per-sample oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    auto truth = random_bits(n, rng, 0.2 + 0.6 * (rng() % 100) / 100.0);
    truth[0] = 0;
    truth[1] = 1;
    const auto pred = random_bits(n, rng);
    const auto m = ConfusionMatrix::from_predictions(truth, pred);
    CHECK(m.total() == n);
    CHECK(std::abs(uar(m) - uar_oracle(truth, pred)) <= 1e-12);

    // Duplicating one class k times leaves its recall alone.
    std::vector<int> t2 = truth, p2 = pred;
    for (std::size_t i = 0; i < n; ++i) {
      if (truth[i] == 1) {
        for (int k = 0; k < 3; ++k) {
          t2.push_back(1);
          p2.push_back(pred[i]);
        }
      }
    }
    CHECK(std::abs(uar(ConfusionMatrix::from_predictions(t2, p2)) - uar(m)) <= 1e-12);
  }
}

TEST_CASE("phi") {
  std::vector<int> x{1, 0, 1, 1, 0, 0};
  CHECK(phi(x, x) == doctest::Approx(1.0));
  std::vector<int> a, b;
  for (int i = 0; i < 20; ++i) {
    a.push_back(i < 10);
    b.push_back((i / 5) % 2);
  }
  CHECK(phi(a, b) == 0.0);
  expect_error(ErrorCode::kUndefinedCorrelation, [] { phi(std::vector<int>{1, 1, 1}, std::vector<int>{0, 1, 0}); });

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto u = random_bits(100, rng), v = random_bits(100, rng, 0.3);
    u[0] = v[0] = 0;
    u[1] = v[1] = 1;
    const std::vector<double> ud(u.begin(), u.end()), vd(v.begin(), v.end());
    CHECK(std::abs(phi(u, v) - pearson_oracle(ud, vd)) <= 1e-12);
    CHECK(phi(u, v) == phi(v, u));
    CHECK(std::abs(phi(u, v)) <= 1.0);
  }
}

TEST_CASE("pearson") {
  std::vector<double> x{0.1, 2.0, -1.5, 3.3, 0.0};
  std::vector<double> affine, neg;
  for (double v : x) {
    affine.push_back(2 * v + 3);
    neg.push_back(-v);
  }
  CHECK(pearson(x, affine) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-14));
  expect_error(ErrorCode::kUndefinedCorrelation, [] { pearson(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}); });

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 500;
    std::vector<double> p(n), q(n);
    const double mix = (rng() % 100) / 100.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = 10 * g(rng) + 5;
      q[i] = mix * p[i] + (1 - mix) * g(rng);
    }
    CHECK(std::abs(pearson(p, q) - pearson_oracle(p, q)) <= 1e-12);
    CHECK(pearson(p, q) == pearson(q, p));
  }
}

TEST_CASE("trait pair table") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  const std::size_t n = 640;
  std::map<Trait, std::vector<double>> scores;
  std::map<Trait, std::vector<int>> labels;
  std::vector<double> base(n);
  for (double& v : base) v = g(rng);
  for (Trait t : corpus::kPersonalityTraits) {
    auto& s = scores[t];
    for (std::size_t i = 0; i < n; ++i) {
      // Correlation 0.5 with `base` for AG; independent otherwise.
      s.push_back(t == Trait::kAG ? 0.5 * base[i] + std::sqrt(0.75) * g(rng) : g(rng));
    }
    labels[t] = random_bits(n, rng);
  }
  scores[Trait::kCO] = base;
  scores[Trait::kNE] = scores[Trait::kOP];
  const auto table = trait_pair_table(scores, labels);
  REQUIRE(table.size() == 10);
  CHECK(table[0].pair_name() == "EX-AG");
  CHECK(table[9].pair_name() == "NE-OP");
  for (const auto& e : table) {
    REQUIRE(e.phi_2scale.has_value());
    CHECK(*e.phi_2scale >= 0.0);
    CHECK(*e.phi_2scale <= 1.0);
    CHECK(*e.pearson_5scale >= 0.0);
    if (e.a == Trait::kNE && e.b == Trait::kOP) CHECK(*e.pearson_5scale == doctest::Approx(1.0));
    if (e.a == Trait::kAG && e.b == Trait::kCO) CHECK(std::abs(*e.pearson_5scale - 0.5) <= 0.1);
  }

  labels[Trait::kEX].assign(n, 1);
  const auto with_null = trait_pair_table(scores, labels);
  CHECK(!with_null[0].phi_2scale.has_value());
  const std::string csv = correlation_table_csv(with_null);
  CHECK(csv.starts_with("pair,phi_2scale,pearson_5scale\nEX-AG,,"));
  CHECK(correlation_table_json(with_null).find("\"phi_2scale\": null") != std::string::npos);

  scores.erase(Trait::kOP);
  expect_error(ErrorCode::kMissingAnnotation, [&] { trait_pair_table(scores, labels); });
}

TEST_CASE("uar report layout") {
  std::vector<UarRow> rows(2);
  rows[0].method = "Transformer-based";
  rows[0].uar = {{Trait::kEX, 0.5}, {Trait::kAG, 0.61234}, {Trait::kCO, 0.7}, {Trait::kNE, 0.8}, {Trait::kOP, 0.9}};
  rows[1].method = "Wav2vec2-based (mid.)";
  rows[1].uar = {{Trait::kEX, 1.0}};
  CHECK(uar_table_csv(rows) ==
        "method,EX,AG,CO,NE,OP,avg\n"
        "Transformer-based,50.00,61.23,70.00,80.00,90.00,70.25\n"
        "Wav2vec2-based (mid.),100.00,,,,,100.00\n");
  CHECK(uar_table_json(rows).find("\"AG\": null") != std::string::npos);
}
