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

#include "afx/experiment/config.hpp"

#include "afx/error.hpp"
#include "afx/tensor/container.hpp"
#include "json.hpp"

namespace afx::experiment {

void ExperimentConfig::validate() const {
  if (pretrain_epoch_grid.empty()) fail(ErrorCode::kInvalidArgument, "pretrain epoch grid is empty");
  for (std::size_t i = 0; i < pretrain_epoch_grid.size(); ++i) {
    if (pretrain_epoch_grid[i] == 0 || (i > 0 && pretrain_epoch_grid[i] <= pretrain_epoch_grid[i - 1])) {
      fail(ErrorCode::kInvalidArgument, "pretrain epoch grid must be positive and strictly ascending");
    }
  }
  if (folds < 2) fail(ErrorCode::kInvalidArgument, "need at least 2 folds");
  if (batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch size must be positive");
  if (!(lr > 0.0) || !(finetune_lr > 0.0) || weight_decay < 0.0) {
    fail(ErrorCode::kInvalidArgument, "learning rates must be positive and weight decay non-negative");
  }
  if (traits.empty()) fail(ErrorCode::kInvalidArgument, "no traits selected");
  model.validate();
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) fail(ErrorCode::kInvalidArgument, "--seed is required for training commands");
  return *seed;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json traits_json = nlohmann::ordered_json::array();
  for (corpus::Trait t : traits) traits_json.push_back(corpus::trait_name(t));
  nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
  for (dsp::MaskKind k : mask_kinds) kinds.push_back(dsp::mask_kind_name(k));
  nlohmann::ordered_json j{
      {"task", task},
      {"pretrain_label", corpus::trait_name(pretrain_label)},
      {"pretrain_epoch_grid", pretrain_epoch_grid},
      {"finetune_epochs", finetune_epochs},
      {"folds", folds},
      {"lr", lr},
      {"finetune_lr", finetune_lr},
      {"weight_decay", weight_decay},
      {"batch_size", batch_size},
      {"seed", seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json()},
      {"speaker_disjoint", speaker_disjoint},
      {"traits", traits_json},
      {"model", nlohmann::ordered_json::parse(model.to_json())},
      {"mask_kinds", kinds},
      {"mask_freq_width", mask_freq_width},
      {"mask_time_width", mask_time_width},
      {"masks_per_axis", masks_per_axis},
      {"baseline_dropout", baseline_dropout},
      {"embedding_label", embedding_label},
  };
  return j.dump();
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentConfig c;
    c.task = j.at("task");
    c.pretrain_label = corpus::parse_trait(j.at("pretrain_label").get<std::string>());
    c.pretrain_epoch_grid = j.at("pretrain_epoch_grid").get<std::vector<std::size_t>>();
    c.finetune_epochs = j.at("finetune_epochs");
    c.folds = j.at("folds");
    c.lr = j.at("lr");
    c.finetune_lr = j.at("finetune_lr");
    c.weight_decay = j.at("weight_decay");
    c.batch_size = j.at("batch_size");
    if (!j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
    c.speaker_disjoint = j.at("speaker_disjoint");
    c.traits.clear();
    for (const auto& t : j.at("traits")) c.traits.push_back(corpus::parse_trait(t.get<std::string>()));
    c.model = model::SerModelConfig::from_json(j.at("model").dump());
    c.mask_kinds.clear();
    for (const auto& k : j.at("mask_kinds")) c.mask_kinds.push_back(dsp::parse_mask_kind(k.get<std::string>()));
    c.mask_freq_width = j.at("mask_freq_width");
    c.mask_time_width = j.at("mask_time_width");
    c.masks_per_axis = j.at("masks_per_axis");
    c.baseline_dropout = j.at("baseline_dropout");
    c.embedding_label = j.at("embedding_label");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("experiment config: ") + e.what());
  }
}

std::string ExperimentConfig::hash() const { return sha256_hex(to_json()); }

dsp::AugmentPlan augment_plan(const ExperimentConfig& config, std::uint64_t seed) {
  dsp::AugmentPlan plan;
  plan.kinds = config.mask_kinds;
  plan.max_freq_width = config.mask_freq_width;
  plan.max_time_width = config.mask_time_width;
  plan.num_masks = config.masks_per_axis;
  plan.seed = seed;
  return plan;
}

}  // namespace afx::experiment
