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

#include "afx/metrics/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "afx/error.hpp"
#include "json.hpp"

namespace afx::metrics {

namespace {

void check_binary(std::span<const int> v, const char* what) {
  for (int x : v) {
    if (x != 0 && x != 1) fail(ErrorCode::kLabelError, std::string(what) + " must hold 0/1 values");
  }
}

}  // namespace

ConfusionMatrix ConfusionMatrix::from_predictions(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorCode::kShapeError, "truth and predictions differ in length");
  check_binary(truth, "truth");
  check_binary(predicted, "predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[truth[i]][predicted[i]];
  return cm;
}

std::uint64_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) counts[r][c] += other.counts[r][c];
  return *this;
}

double uar(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (int r = 0; r < 2; ++r) {
    const std::uint64_t row = cm.counts[r][0] + cm.counts[r][1];
    if (row == 0) fail(ErrorCode::kUndefinedRecall, "class " + std::to_string(r) + " has no samples");
    sum += static_cast<double>(cm.counts[r][r]) / static_cast<double>(row);
  }
  return sum / 2.0;
}

double phi(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) fail(ErrorCode::kShapeError, "phi needs equal-length vectors");
  check_binary(x, "phi input");
  check_binary(y, "phi input");
  double n[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < x.size(); ++i) n[x[i]][y[i]] += 1.0;
  const double x1 = n[1][0] + n[1][1], x0 = n[0][0] + n[0][1];
  const double y1 = n[0][1] + n[1][1], y0 = n[0][0] + n[1][0];
  if (x1 == 0 || x0 == 0 || y1 == 0 || y0 == 0) fail(ErrorCode::kUndefinedCorrelation, "phi of a constant vector");
  return (n[1][1] * n[0][0] - n[1][0] * n[0][1]) / std::sqrt(x1 * x0 * y1 * y0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kShapeError, "pearson needs equal-length vectors");
  if (x.size() < 2) fail(ErrorCode::kUndefinedCorrelation, "pearson needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kUndefinedCorrelation, "pearson of a zero-variance vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string CorrelationEntry::pair_name() const {
  return std::string(corpus::trait_name(a)) + "-" + std::string(corpus::trait_name(b));
}

std::vector<CorrelationEntry> trait_pair_table(const std::map<corpus::Trait, std::vector<double>>& scores_5scale,
                                               const std::map<corpus::Trait, std::vector<int>>& labels_2scale) {
  for (corpus::Trait t : corpus::kPersonalityTraits) {
    if (!scores_5scale.contains(t) || !labels_2scale.contains(t)) {
      fail(ErrorCode::kMissingAnnotation, "correlation table needs " + std::string(corpus::trait_name(t)));
    }
  }
  auto undefined_as_null = [](auto&& f) -> std::optional<double> {
    try {
      return std::abs(f());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUndefinedCorrelation) return std::nullopt;
      throw;
    }
  };
  std::vector<CorrelationEntry> out;
  const auto& traits = corpus::kPersonalityTraits;
  for (std::size_t i = 0; i < traits.size(); ++i) {
    for (std::size_t j = i + 1; j < traits.size(); ++j) {
      CorrelationEntry e;
      e.a = traits[i];
      e.b = traits[j];
      e.phi_2scale = undefined_as_null([&] { return phi(labels_2scale.at(e.a), labels_2scale.at(e.b)); });
      e.pearson_5scale = undefined_as_null([&] { return pearson(scores_5scale.at(e.a), scores_5scale.at(e.b)); });
      out.push_back(e);
    }
  }
  return out;
}

double UarRow::average() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (corpus::Trait t : corpus::kPersonalityTraits) {
    if (auto it = uar.find(t); it != uar.end()) {
      sum += it->second;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::string uar_table_csv(std::span<const UarRow> rows) {
  std::string out = "method,EX,AG,CO,NE,OP,avg\n";
  for (const UarRow& r : rows) {
    out += r.method;
    for (corpus::Trait t : corpus::kPersonalityTraits) {
      out += ',';
      if (auto it = r.uar.find(t); it != r.uar.end()) out += fmt::format("{:.2f}", 100.0 * it->second);
    }
    out += r.uar.empty() ? std::string(",") : fmt::format(",{:.2f}", 100.0 * r.average());
    out += '\n';
  }
  return out;
}

std::string uar_table_json(std::span<const UarRow> rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const UarRow& r : rows) {
    nlohmann::ordered_json row{{"method", r.method}};
    for (corpus::Trait t : corpus::kPersonalityTraits) {
      auto it = r.uar.find(t);
      row[std::string(corpus::trait_name(t))] = it == r.uar.end() ? nlohmann::ordered_json() : nlohmann::ordered_json(it->second);
    }
    row["avg"] = r.uar.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(r.average());
    j.push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string correlation_table_csv(std::span<const CorrelationEntry> entries) {
  std::string out = "pair,phi_2scale,pearson_5scale\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  for (const CorrelationEntry& e : entries) {
    out += e.pair_name() + ',' + cell(e.phi_2scale) + ',' + cell(e.pearson_5scale) + '\n';
  }
  return out;
}

std::string correlation_table_json(std::span<const CorrelationEntry> entries) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  auto cell = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  for (const CorrelationEntry& e : entries) {
    j.push_back({{"pair", e.pair_name()}, {"phi_2scale", cell(e.phi_2scale)}, {"pearson_5scale", cell(e.pearson_5scale)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace afx::metrics
