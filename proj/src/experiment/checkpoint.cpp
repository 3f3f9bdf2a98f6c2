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

#include "afx/experiment/checkpoint.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "afx/error.hpp"
#include "json.hpp"

namespace afx::experiment {

namespace {

constexpr std::string_view kMomentPrefix = "adamw.m.";
constexpr std::string_view kVelocityPrefix = "adamw.v.";

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::vector<ContainerEntry> entries = checkpoint.parameters;
  for (const auto& [name, values] : checkpoint.optimizer.m) {
    entries.push_back({std::string(kMomentPrefix) + name, {values.size()}, false, values});
  }
  for (const auto& [name, values] : checkpoint.optimizer.v) {
    entries.push_back({std::string(kVelocityPrefix) + name, {values.size()}, false, values});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_container(path, entries);

  nlohmann::ordered_json meta;
  meta["model"] = nlohmann::ordered_json::parse(checkpoint.model.to_json());
  meta["label"] = corpus::trait_name(checkpoint.label);
  meta["epochs"] = checkpoint.epochs;
  meta["seed"] = checkpoint.seed;
  meta["config_hash"] = checkpoint.config_hash;
  meta["optimizer_steps"] = checkpoint.optimizer.step_count;
  std::ofstream out(path.string() + ".json");
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string() + ".json");
  out << meta.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path.string() + ".json");
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string() + ".json");
  Checkpoint ck;
  try {
    const auto meta = nlohmann::json::parse(in);
    ck.model = model::SerModelConfig::from_json(meta.at("model").dump());
    ck.label = corpus::parse_trait(meta.at("label").get<std::string>());
    ck.epochs = meta.at("epochs").get<std::size_t>();
    ck.seed = meta.at("seed").get<std::uint64_t>();
    ck.config_hash = meta.at("config_hash").get<std::string>();
    ck.optimizer.step_count = meta.at("optimizer_steps").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, "checkpoint metadata " + path.string() + ": " + e.what());
  }
  for (ContainerEntry& e : read_container(path)) {
    if (starts_with(e.name, kMomentPrefix)) {
      ck.optimizer.m[e.name.substr(kMomentPrefix.size())] = std::move(e.values);
    } else if (starts_with(e.name, kVelocityPrefix)) {
      ck.optimizer.v[e.name.substr(kVelocityPrefix.size())] = std::move(e.values);
    } else {
      ck.parameters.push_back(std::move(e));
    }
  }
  return ck;
}

model::TransformerSer instantiate(const Checkpoint& checkpoint, const model::SerModelConfig& expected) {
  if (!(checkpoint.model == expected)) {
    fail(ErrorCode::kConfigMismatch, "checkpoint model " + checkpoint.model.to_json() +
                                         " differs from configured " + expected.to_json());
  }
  model::TransformerSer m(expected, checkpoint.seed);
  restore_parameters(m.params(), checkpoint.parameters, true);
  return m;
}

std::string checkpoint_file_name(const Checkpoint& checkpoint) {
  return fmt::format("pretrain_{}_ep{:03d}.aftx", corpus::trait_name(checkpoint.label), checkpoint.epochs);
}

}  // namespace afx::experiment
