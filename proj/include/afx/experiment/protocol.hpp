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
#include <map>
#include <string>
#include <vector>

#include "afx/experiment/checkpoint.hpp"
#include "afx/experiment/config.hpp"
#include "afx/experiment/dataset.hpp"
#include "afx/experiment/record.hpp"
#include "afx/metrics/metrics.hpp"
#include "afx/model/embedding.hpp"

namespace afx::experiment {

struct PretrainResult {
  std::vector<Checkpoint> checkpoints;  // ascending epochs
  std::vector<double> epoch_losses;     // epochs run in this call
};

/// Trains the full model on the emotion corpus and snapshots it at every grid
/// point. Epoch e shuffles with a seed derived from (seed, e), so one
/// continuous run equals separately trained runs, and `resume` continues a
/// stored checkpoint exactly.
PretrainResult run_pretrain(const ExperimentConfig& config, const Dataset& emotion, const Checkpoint* resume = nullptr);

struct TransferOptions {
  // Frozen backbone outputs are computed once per clip. Turning this off
  // runs the backbone inside every training step, with identical results.
  bool cache_features = true;
};

/// Per trait and fold: frozen backbone, fresh head, finetune_epochs of AdamW
/// on the training folds, UAR on the held-out fold.
RunRecord run_transfer(const ExperimentConfig& config, const Checkpoint& checkpoint, const Dataset& personality,
                       const TransferOptions& options = {});

struct AuditRow {
  corpus::Trait trait = corpus::Trait::kEX;
  std::size_t fold = 0;
  std::string role;  // "train" or "test"
  std::string clip_id;
  std::string tag;   // "original" or a mask kind
};

struct AugmentRun {
  RunRecord record;
  std::vector<AuditRow> audit;
};

/// The spectrogram CNN trained from scratch per trait and fold, with only the
/// training folds augmented.
AugmentRun run_augment_baseline(const ExperimentConfig& config, const Dataset& personality);

// Throws InvalidArgument when a test-fold clip appears in any training role.
void audit_leakage(const std::vector<AuditRow>& audit);
std::string audit_csv(const std::vector<AuditRow>& audit);

/// ClassifierHead on selected embedding-stack features under the same folds.
/// Throws MissingEmbedding when a clip has no stack.
RunRecord run_embed_head(const ExperimentConfig& config, const Dataset& personality,
                         const std::map<std::string, model::EmbeddingStack>& stacks, model::LayerMode mode);

struct MultitaskOptions {
  // Train the backbone jointly (the emotion variant) instead of using frozen
  // checkpoint features.
  bool train_backbone = false;
};

/// Two heads over one trunk, trained on the sum of both losses; reports a UAR
/// series per task. Folds are stratified on task A. Without train_backbone a
/// checkpoint is required.
RunRecord run_multitask(const ExperimentConfig& config, const Dataset& data, corpus::Trait task_a,
                        corpus::Trait task_b, const Checkpoint* backbone, const MultitaskOptions& options = {});

/// The ten-pair table from the dataset's five-point scores and binary labels.
std::vector<metrics::CorrelationEntry> correlate(const Dataset& personality);

}  // namespace afx::experiment
