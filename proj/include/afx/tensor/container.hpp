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

// AFTX1 tensor container.
//
// Layout (all integers little-endian):
//   "AFTX1"                      5 bytes magic
//   u32 entry_count
//   entry_count × {
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, rank × u64 extent
//     u8  trainable (0/1)
//     u64 byte offset of the payload, relative to the payload section
//   }
//   payload section: each entry's values as IEEE-754 binary64, little-endian,
//   in manifest order.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "afx/tensor/parameter.hpp"

namespace afx {

struct ContainerEntry {
  std::string name;
  Shape shape;
  bool trainable = false;
  std::vector<double> values;

  bool operator==(const ContainerEntry&) const = default;
};

std::vector<std::uint8_t> encode_container(std::span<const ContainerEntry> entries);
std::vector<ContainerEntry> decode_container(std::span<const std::uint8_t> bytes);

void write_container(const std::filesystem::path& path, std::span<const ContainerEntry> entries);
std::vector<ContainerEntry> read_container(const std::filesystem::path& path);

const ContainerEntry& find_entry(std::span<const ContainerEntry> entries, std::string_view name);

std::vector<ContainerEntry> snapshot_parameters(const ParameterSet& params);
// Copies values (and trainable flags when `restore_flags`) into matching
// parameters. Missing names or shape differences raise ConfigMismatch.
void restore_parameters(ParameterSet& params, std::span<const ContainerEntry> entries,
                        bool restore_flags = true);

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
// Hash of the AFTX1 encoding of the parameters selected by `pred`.
std::string parameter_digest(const ParameterSet& params,
                             const std::function<bool(const Parameter&)>& pred);

}  // namespace afx
