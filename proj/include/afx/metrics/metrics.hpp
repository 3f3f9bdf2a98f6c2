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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afx/corpus/corpus.hpp"

namespace afx::metrics {

// Rows are the true class, columns the prediction.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  static ConfusionMatrix from_predictions(std::span<const int> truth, std::span<const int> predicted);
  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

// Mean of the per-class recalls. Throws UndefinedRecall when a class has no
// samples.
double uar(const ConfusionMatrix& cm);

// (n11·n00 − n10·n01) / sqrt(n1•·n0•·n•1·n•0). Throws UndefinedCorrelation
// when either vector is constant.
double phi(std::span<const int> x, std::span<const int> y);

// Sample correlation. Throws UndefinedCorrelation on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationEntry {
  corpus::Trait a = corpus::Trait::kEX;
  corpus::Trait b = corpus::Trait::kAG;
  std::optional<double> phi_2scale;       // |phi| on binary labels, null when undefined
  std::optional<double> pearson_5scale;   // |pearson| on per-clip judge means

  std::string pair_name() const;  // "EX-AG"
  bool operator==(const CorrelationEntry&) const = default;
};

/// All ten unordered pairs of the five personality traits, in trait order.
/// Undefined coefficients become nulls; every other error propagates.
std::vector<CorrelationEntry> trait_pair_table(const std::map<corpus::Trait, std::vector<double>>& scores_5scale,
                                               const std::map<corpus::Trait, std::vector<int>>& labels_2scale);

struct UarRow {
  std::string method;
  std::map<corpus::Trait, double> uar;  // fraction in [0, 1]

  // Mean over the personality traits present.
  double average() const;
};

// method,EX,AG,CO,NE,OP,avg with values in percent, two decimals. Missing
// traits are left blank.
std::string uar_table_csv(std::span<const UarRow> rows);
std::string uar_table_json(std::span<const UarRow> rows);

// pair,phi_2scale,pearson_5scale with shortest round-trip values; nulls blank.
std::string correlation_table_csv(std::span<const CorrelationEntry> entries);
std::string correlation_table_json(std::span<const CorrelationEntry> entries);

}  // namespace afx::metrics
