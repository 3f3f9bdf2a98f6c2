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
#include <string_view>
#include <vector>

#include "afx/dsp/spectrogram.hpp"

namespace afx::dsp {

enum class MaskKind { kFrequency, kTime, kFreqThenTime, kTimeThenFreq };

std::string_view mask_kind_name(MaskKind kind);
MaskKind parse_mask_kind(std::string_view name);

struct MaskSpec {
  MaskKind kind = MaskKind::kFrequency;
  std::size_t max_freq_width = 8;   // F, in mel bins
  std::size_t max_time_width = 40;  // T, in frames
  std::size_t num_masks = 1;        // per axis
  std::uint64_t seed = 0;
};

enum class MaskAxis { kFrequency, kTime };

struct MaskRegion {
  MaskAxis axis;
  std::size_t start;
  std::size_t width;  // may be 0
};

/// Regions in application order. Frequency and time regions come from
/// separate seeded streams, so both compositions of the same seed cover the
/// same cells. Throws MaskTooLarge if F >= mel_bins (or T >= frames) for an
/// axis the kind uses.
std::vector<MaskRegion> sample_mask_regions(const MaskSpec& spec, std::size_t mel_bins,
                                            std::size_t frames);

/// Returns a masked copy; masked cells take the mean of the input spectrogram.
Spectrogram apply_mask(const Spectrogram& input, const MaskSpec& spec);

struct AugmentPlan {
  std::vector<MaskKind> kinds{MaskKind::kFrequency, MaskKind::kTime, MaskKind::kFreqThenTime};
  std::size_t max_freq_width = 8;
  std::size_t max_time_width = 40;
  std::size_t num_masks = 1;
  std::uint64_t seed = 0;
};

struct AugmentedItem {
  Spectrogram spectrogram;
  std::string tag;  // "original" or a mask kind name
  std::uint64_t seed = 0;
  std::size_t source_index = 0;
};

inline constexpr std::string_view kOriginalTag = "original";

/// Each clip followed by one masked copy per plan kind, so the result holds
/// |clips| × (1 + |kinds|) items.
std::vector<AugmentedItem> augment_corpus(std::span<const Spectrogram> clips, const AugmentPlan& plan);

// AFTX1 entry "spectrogram" [mel×frames] plus `<path>.json` provenance.
struct SpectrogramProvenance {
  std::string source_clip_id;
  std::string mask_kind;  // "original" when unmasked
  std::uint64_t seed = 0;
};
void write_spectrogram(const std::filesystem::path& path, const Spectrogram& spec,
                       const SpectrogramProvenance& provenance);
Spectrogram read_spectrogram(const std::filesystem::path& path, SpectrogramProvenance* provenance = nullptr);

}  // namespace afx::dsp
