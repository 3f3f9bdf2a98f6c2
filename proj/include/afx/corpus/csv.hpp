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
#include <span>
#include <string>
#include <vector>

#include "afx/corpus/corpus.hpp"

namespace afx::corpus {

// Scores:      clip_id,judge_id,trait,score
// Manifest:    clip_id,speaker_id,path,duration_s
// Continuous:  clip_source_id,annotator_id,dimension,time_s,value
// Labels:      clip_id,trait,label

struct ManifestRow {
  std::string clip_id;
  std::string speaker_id;
  std::string path;  // relative paths resolve against the manifest's directory
  double duration_s = 0.0;
};

struct LabelRow {
  std::string clip_id;
  Trait trait = Trait::kEX;
  int label = 0;
};

// Split one CSV line on commas; double quotes group fields and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

void write_scores_csv(const std::filesystem::path& path, std::span<const JudgeScores> scores);
/// One matrix per trait, clips and judges in first-appearance order. A
/// missing (judge, clip) cell raises MissingAnnotation.
std::vector<JudgeScores> read_scores_csv(const std::filesystem::path& path);

void write_manifest_csv(const std::filesystem::path& path, std::span<const ManifestRow> rows);
std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path);

void write_continuous_csv(const std::filesystem::path& path, std::span<const ContinuousAnnotation> rows);
std::vector<ContinuousAnnotation> read_continuous_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path, std::span<const LabelRow> rows);
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path);

/// Joins a manifest with label rows into clips; clips keep manifest order.
std::vector<AnnotatedClip> join_labels(std::span<const ManifestRow> manifest, std::span<const LabelRow> labels);

}  // namespace afx::corpus
