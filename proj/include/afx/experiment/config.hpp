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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afx/corpus/corpus.hpp"
#include "afx/dsp/masking.hpp"
#include "afx/model/ser.hpp"

namespace afx::experiment {

struct ExperimentConfig {
  std::string task = "transfer";
  corpus::Trait pretrain_label = corpus::Trait::kArousal;
  std::vector<std::size_t> pretrain_epoch_grid{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::size_t finetune_epochs = 100;
  std::size_t folds = 5;
  double lr = 1e-4;           // pretraining and from-scratch training
  double finetune_lr = 1e-4;  // heads on a frozen backbone or embeddings
  double weight_decay = 1e-5;
  std::size_t batch_size = 16;
  std::optional<std::uint64_t> seed;
  bool speaker_disjoint = false;
  std::vector<corpus::Trait> traits{corpus::kPersonalityTraits.begin(), corpus::kPersonalityTraits.end()};
  model::SerModelConfig model;

  // Augmentation baseline.
  std::vector<dsp::MaskKind> mask_kinds{dsp::MaskKind::kFrequency, dsp::MaskKind::kTime,
                                        dsp::MaskKind::kFreqThenTime};
  std::size_t mask_freq_width = 8;
  std::size_t mask_time_width = 40;
  std::size_t masks_per_axis = 1;
  double baseline_dropout = 0.5;

  std::string embedding_label = "Wav2vec2-based";

  // Grid non-empty and strictly ascending, positive sizes.
  void validate() const;
  // Throws InvalidArgument when no seed was given.
  std::uint64_t require_seed() const;

  std::string to_json() const;
  static ExperimentConfig from_json(std::string_view text);
  // SHA-256 of the canonical JSON.
  std::string hash() const;
};

dsp::AugmentPlan augment_plan(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace afx::experiment
