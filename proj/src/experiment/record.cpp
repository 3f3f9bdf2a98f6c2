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

#include "afx/experiment/record.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "afx/error.hpp"
#include "json.hpp"

namespace afx::experiment {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::map<corpus::Trait, double> RunRecord::mean_uar(std::string_view task) const {
  std::map<corpus::Trait, std::pair<double, std::size_t>> acc;
  for (const FoldResult& f : folds) {
    if (f.task != task) continue;
    acc[f.trait].first += f.uar;
    ++acc[f.trait].second;
  }
  std::map<corpus::Trait, double> out;
  for (const auto& [t, p] : acc) out[t] = p.first / static_cast<double>(p.second);
  return out;
}

double RunRecord::overall_mean_uar(std::string_view task) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const FoldResult& f : folds) {
    if (f.task != task) continue;
    sum += f.uar;
    ++n;
  }
  if (n == 0) fail(ErrorCode::kInvalidArgument, "run record has no entries for task " + std::string(task));
  return sum / static_cast<double>(n);
}

std::string RunRecord::to_json() const {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const FoldResult& f : folds) {
    const auto& c = f.confusion.counts;
    entries.push_back({{"trait", corpus::trait_name(f.trait)},
                       {"fold", f.fold},
                       {"task", f.task},
                       {"uar", f.uar},
                       {"confusion", {{c[0][0], c[0][1]}, {c[1][0], c[1][1]}}},
                       {"train_size", f.train_size},
                       {"test_size", f.test_size},
                       {"epoch_losses", f.epoch_losses}});
  }
  nlohmann::ordered_json info_json = nlohmann::ordered_json::object();
  for (const auto& [k, v] : info) info_json[k] = v;
  nlohmann::ordered_json j{{"kind", kind},
                           {"method", method},
                           {"config_hash", config_hash},
                           {"seed", seed},
                           {"entries", entries},
                           {"checkpoints", checkpoints},
                           {"info", info_json},
                           {"wall_time_s", wall_time_s}};
  return j.dump(2) + "\n";
}

RunRecord RunRecord::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunRecord r;
    r.kind = j.at("kind");
    r.method = j.at("method");
    r.config_hash = j.at("config_hash");
    r.seed = j.at("seed");
    for (const auto& e : j.at("entries")) {
      FoldResult f;
      f.trait = corpus::parse_trait(e.at("trait").get<std::string>());
      f.fold = e.at("fold");
      f.task = e.at("task");
      f.uar = e.at("uar");
      const auto& c = e.at("confusion");
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) f.confusion.counts[a][b] = c.at(a).at(b);
      f.train_size = e.at("train_size");
      f.test_size = e.at("test_size");
      f.epoch_losses = e.at("epoch_losses").get<std::vector<double>>();
      r.folds.push_back(std::move(f));
    }
    r.checkpoints = j.at("checkpoints").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("info").items()) r.info[k] = v.get<std::string>();
    r.wall_time_s = j.at("wall_time_s");
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("run record: ") + e.what());
  }
}

void write_run_record(const std::filesystem::path& path, const RunRecord& record) {
  write_text(path, record.to_json());
}

RunRecord read_run_record(const std::filesystem::path& path) { return RunRecord::from_json(read_text(path)); }

std::vector<metrics::UarRow> uar_rows(std::span<const RunRecord> records) {
  std::vector<metrics::UarRow> rows;
  for (const RunRecord& r : records) {
    const bool multitask = std::any_of(r.folds.begin(), r.folds.end(), [](const FoldResult& f) { return f.task == "B"; });
    for (const char* task : {"A", "B"}) {
      auto means = r.mean_uar(task);
      if (means.empty()) continue;
      metrics::UarRow row;
      row.method = multitask ? r.method + " [task " + task + "]" : r.method;
      for (const auto& [t, v] : means) {
        if (!corpus::is_emotion(t)) row.uar[t] = v;
      }
      if (!row.uar.empty()) rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string pretrain_curve_csv(std::span<const RunRecord> records) {
  struct Point {
    std::string label;
    std::size_t epochs;
    metrics::UarRow row;
  };
  std::vector<Point> points;
  for (const RunRecord& r : records) {
    if (r.kind != "transfer") continue;
    auto label = r.info.find("pretrain_label");
    auto epochs = r.info.find("pretrain_epochs");
    if (label == r.info.end() || epochs == r.info.end()) continue;
    Point p{label->second, std::stoul(epochs->second), {}};
    p.row.uar = r.mean_uar("A");
    points.push_back(std::move(p));
  }
  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.label != b.label ? a.label < b.label : a.epochs < b.epochs;
  });
  std::string out = "pretrain_label,epochs,EX,AG,CO,NE,OP,avg\n";
  for (const Point& p : points) {
    out += fmt::format("{},{}", p.label, p.epochs);
    for (corpus::Trait t : corpus::kPersonalityTraits) {
      auto it = p.row.uar.find(t);
      out += it == p.row.uar.end() ? std::string(",") : fmt::format(",{:.2f}", 100.0 * it->second);
    }
    out += fmt::format(",{:.2f}\n", 100.0 * p.row.average());
  }
  return out;
}

void write_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::kIoError, "no *.json run records in " + runs_dir.string());
  std::vector<RunRecord> records;
  for (const auto& f : files) records.push_back(read_run_record(f));
  std::filesystem::create_directories(out_dir);
  const auto rows = uar_rows(records);
  write_text(out_dir / "uar_table.csv", metrics::uar_table_csv(rows));
  write_text(out_dir / "uar_table.json", metrics::uar_table_json(rows));
  write_text(out_dir / "pretrain_curve.csv", pretrain_curve_csv(records));
}

}  // namespace afx::experiment
