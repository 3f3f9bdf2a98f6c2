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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "afx/corpus/corpus.hpp"

namespace afx::corpus {

struct FoldOptions {
  std::size_t num_folds = 5;
  bool speaker_disjoint = false;
};

struct FoldPlan {
  std::size_t num_folds = 5;
  Trait stratify_by = Trait::kEX;
  bool speaker_disjoint = false;
  std::uint64_t seed = 0;
  std::vector<std::string> clip_ids;  // corpus order
  std::vector<std::size_t> folds;     // parallel to clip_ids

  std::size_t fold_of(std::string_view clip_id) const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;

  std::string to_json() const;
  static FoldPlan from_json(std::string_view text);
  bool operator==(const FoldPlan&) const = default;
};

/// Stratified k-fold assignment on one trait's binary labels. Positives and
/// negatives are shuffled separately and dealt round-robin, so fold sizes
/// differ by at most one. In speaker-disjoint mode whole speaker groups are
/// placed greedily, which keeps speakers intact at the cost of exact balance.
FoldPlan make_folds(std::span<const AnnotatedClip> clips, Trait trait, std::uint64_t seed,
                    const FoldOptions& options = {});

void write_fold_plan(const std::filesystem::path& path, const FoldPlan& plan);
FoldPlan read_fold_plan(const std::filesystem::path& path);

}  // namespace afx::corpus
