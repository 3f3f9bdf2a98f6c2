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
#include <string>
#include <vector>

#include "afx/corpus/corpus.hpp"
#include "afx/model/ser.hpp"
#include "afx/tensor/adamw.hpp"
#include "afx/tensor/container.hpp"

namespace afx::experiment {

struct Checkpoint {
  model::SerModelConfig model;
  corpus::Trait label = corpus::Trait::kArousal;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<ContainerEntry> parameters;
  AdamWState optimizer;
};

// Parameters and optimizer moments in one AFTX1 file, metadata in
// `<path>.json`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws ConfigMismatch when the checkpoint was trained with another model
// configuration or its tensors do not fit.
model::TransformerSer instantiate(const Checkpoint& checkpoint, const model::SerModelConfig& expected);

std::string checkpoint_file_name(const Checkpoint& checkpoint);

}  // namespace afx::experiment
