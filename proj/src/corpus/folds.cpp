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

#include "afx/corpus/folds.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "afx/error.hpp"
#include "json.hpp"

namespace afx::corpus {

std::size_t FoldPlan::fold_of(std::string_view clip_id) const {
  for (std::size_t i = 0; i < clip_ids.size(); ++i) {
    if (clip_ids[i] == clip_id) return folds[i];
  }
  fail(ErrorCode::kInvalidArgument, "clip " + std::string(clip_id) + " is not in the fold plan");
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (folds[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (folds[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(num_folds, 0);
  for (std::size_t f : folds) ++sizes[f];
  return sizes;
}

std::string FoldPlan::to_json() const {
  nlohmann::ordered_json assignments = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < clip_ids.size(); ++i) assignments[clip_ids[i]] = folds[i];
  nlohmann::ordered_json j{{"num_folds", num_folds},
                           {"stratify_by", trait_name(stratify_by)},
                           {"speaker_disjoint", speaker_disjoint},
                           {"seed", seed},
                           {"assignments", assignments}};
  return j.dump(2);
}

FoldPlan FoldPlan::from_json(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
    FoldPlan plan;
    plan.num_folds = j.at("num_folds").get<std::size_t>();
    plan.stratify_by = parse_trait(j.at("stratify_by").get<std::string>());
    plan.speaker_disjoint = j.at("speaker_disjoint").get<bool>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, fold] : j.at("assignments").items()) {
      plan.clip_ids.push_back(id);
      plan.folds.push_back(fold.get<std::size_t>());
      if (plan.folds.back() >= plan.num_folds) fail(ErrorCode::kFormatError, "fold index out of range for " + id);
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("fold plan: ") + e.what());
  }
}

FoldPlan make_folds(std::span<const AnnotatedClip> clips, Trait trait, std::uint64_t seed,
                    const FoldOptions& options) {
  const std::size_t k = options.num_folds;
  if (k < 2) fail(ErrorCode::kInvalidArgument, "need at least 2 folds");
  if (clips.size() < k) {
    fail(ErrorCode::kInvalidArgument, std::to_string(clips.size()) + " clips cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<int> labels;
  labels.reserve(clips.size());
  for (const AnnotatedClip& c : clips) labels.push_back(c.label(trait));
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == clips.size()) {
    fail(ErrorCode::kDegenerateLabels, "only one class present for " + std::string(trait_name(trait)));
  }

  FoldPlan plan;
  plan.num_folds = k;
  plan.stratify_by = trait;
  plan.speaker_disjoint = options.speaker_disjoint;
  plan.seed = seed;
  for (const AnnotatedClip& c : clips) plan.clip_ids.push_back(c.clip_id);
  plan.folds.assign(clips.size(), 0);
  std::mt19937_64 rng(seed);

  if (!options.speaker_disjoint) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < clips.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::size_t counter = 0;
    for (const auto* group : {&pos, &neg}) {
      for (std::size_t i : *group) plan.folds[i] = counter++ % k;
    }
    return plan;
  }

  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    auto [it, inserted] = group_of.emplace(clips[i].speaker_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  if (groups.size() < k) {
    fail(ErrorCode::kInvalidArgument, std::to_string(groups.size()) + " speakers cannot fill " +
                                          std::to_string(k) + " speaker-disjoint folds");
  }
  std::shuffle(groups.begin(), groups.end(), rng);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<std::size_t> size(k, 0), pos(k, 0);
  for (const auto& g : groups) {
    std::size_t g_pos = 0;
    for (std::size_t i : g) g_pos += labels[i];
    // Smallest fold first; among equals, the one whose positive share moves
    // least away from the global share.
    std::size_t best = 0;
    double best_gap = 0.0;
    const double global = static_cast<double>(positives) / static_cast<double>(clips.size());
    for (std::size_t f = 0; f < k; ++f) {
      const double share = static_cast<double>(pos[f] + g_pos) / static_cast<double>(size[f] + g.size());
      const double gap = std::abs(share - global);
      if (f == 0 || size[f] < size[best] || (size[f] == size[best] && gap < best_gap)) {
        best = f;
        best_gap = gap;
      }
    }
    for (std::size_t i : g) plan.folds[i] = best;
    size[best] += g.size();
    pos[best] += g_pos;
  }
  return plan;
}

void write_fold_plan(const std::filesystem::path& path, const FoldPlan& plan) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << plan.to_json() << "\n";
}

FoldPlan read_fold_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return FoldPlan::from_json(buf.str());
}

}  // namespace afx::corpus
