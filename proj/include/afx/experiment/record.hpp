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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afx/corpus/corpus.hpp"
#include "afx/metrics/metrics.hpp"

namespace afx::experiment {

struct FoldResult {
  corpus::Trait trait = corpus::Trait::kEX;
  std::size_t fold = 0;
  std::string task = "A";  // "B" for the second multitask branch
  double uar = 0.0;
  metrics::ConfusionMatrix confusion;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<double> epoch_losses;
};

struct RunRecord {
  std::string kind;    // transfer, embed_head, augment_baseline, multitask
  std::string method;  // report row label
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  std::vector<std::string> checkpoints;
  std::map<std::string, std::string> info;
  double wall_time_s = 0.0;

  // Mean test-fold UAR per trait for one task branch.
  std::map<corpus::Trait, double> mean_uar(std::string_view task = "A") const;
  // Mean over every fold entry of the task.
  double overall_mean_uar(std::string_view task = "A") const;

  std::string to_json() const;
  static RunRecord from_json(std::string_view text);
};

void write_run_record(const std::filesystem::path& path, const RunRecord& record);
RunRecord read_run_record(const std::filesystem::path& path);

// One row per record and task branch, in the given order.
std::vector<metrics::UarRow> uar_rows(std::span<const RunRecord> records);

// Transfer records only: pretrain_label,epochs,EX,AG,CO,NE,OP,avg (percent),
// ordered by label then epochs.
std::string pretrain_curve_csv(std::span<const RunRecord> records);

/// Reads every *.json run record in `runs_dir` (sorted by file name) and
/// writes uar_table.csv, uar_table.json and pretrain_curve.csv to `out_dir`.
/// The output depends only on the stored records.
void write_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir);

}  // namespace afx::experiment
