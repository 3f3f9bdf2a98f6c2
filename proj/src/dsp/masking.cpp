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

#include "afx/dsp/masking.hpp"

#include <fstream>
#include <random>

#include "afx/error.hpp"
#include "afx/tensor/container.hpp"
#include "json.hpp"

namespace afx::dsp {

namespace {

constexpr std::uint64_t kTimeStreamSalt = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool uses_frequency(MaskKind k) { return k != MaskKind::kTime; }
bool uses_time(MaskKind k) { return k != MaskKind::kFrequency; }

void sample_axis(MaskAxis axis, std::size_t max_width, std::size_t extent, std::size_t count,
                 std::uint64_t seed, std::vector<MaskRegion>& out) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t width = std::uniform_int_distribution<std::size_t>(0, max_width)(rng);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, extent - width)(rng);
    out.push_back({axis, start, width});
  }
}

}  // namespace

std::string_view mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::kFrequency: return "freq";
    case MaskKind::kTime: return "time";
    case MaskKind::kFreqThenTime: return "freq_time";
    case MaskKind::kTimeThenFreq: return "time_freq";
  }
  return "?";
}

MaskKind parse_mask_kind(std::string_view name) {
  for (MaskKind k : {MaskKind::kFrequency, MaskKind::kTime, MaskKind::kFreqThenTime, MaskKind::kTimeThenFreq}) {
    if (mask_kind_name(k) == name) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown mask kind '" + std::string(name) + "'");
}

std::vector<MaskRegion> sample_mask_regions(const MaskSpec& spec, std::size_t mel_bins,
                                            std::size_t frames) {
  if (uses_frequency(spec.kind) && spec.max_freq_width >= mel_bins) {
    fail(ErrorCode::kMaskTooLarge, "F=" + std::to_string(spec.max_freq_width) + " with " +
                                       std::to_string(mel_bins) + " mel bins");
  }
  if (uses_time(spec.kind) && spec.max_time_width >= frames) {
    fail(ErrorCode::kMaskTooLarge, "T=" + std::to_string(spec.max_time_width) + " with " +
                                       std::to_string(frames) + " frames");
  }
  std::vector<MaskRegion> freq, time;
  if (uses_frequency(spec.kind)) {
    sample_axis(MaskAxis::kFrequency, spec.max_freq_width, mel_bins, spec.num_masks, spec.seed, freq);
  }
  if (uses_time(spec.kind)) {
    sample_axis(MaskAxis::kTime, spec.max_time_width, frames, spec.num_masks, spec.seed ^ kTimeStreamSalt, time);
  }
  if (spec.kind == MaskKind::kTimeThenFreq) std::swap(freq, time);
  freq.insert(freq.end(), time.begin(), time.end());
  return freq;
}

Spectrogram apply_mask(const Spectrogram& input, const MaskSpec& spec) {
  const auto regions = sample_mask_regions(spec, input.mel_bins, input.frames);
  double fill = 0.0;
  for (double v : input.values) fill += v;
  fill /= static_cast<double>(input.values.size());

  Spectrogram out = input;
  for (const MaskRegion& r : regions) {
    if (r.axis == MaskAxis::kFrequency) {
      for (std::size_t b = r.start; b < r.start + r.width; ++b)
        for (std::size_t t = 0; t < out.frames; ++t) out.at(b, t) = fill;
    } else {
      for (std::size_t b = 0; b < out.mel_bins; ++b)
        for (std::size_t t = r.start; t < r.start + r.width; ++t) out.at(b, t) = fill;
    }
  }
  return out;
}

std::vector<AugmentedItem> augment_corpus(std::span<const Spectrogram> clips, const AugmentPlan& plan) {
  std::vector<AugmentedItem> out;
  out.reserve(clips.size() * (1 + plan.kinds.size()));
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out.push_back({clips[i], std::string(kOriginalTag), 0, i});
    for (MaskKind kind : plan.kinds) {
      MaskSpec spec{kind, plan.max_freq_width, plan.max_time_width, plan.num_masks,
                    mix_seed(mix_seed(plan.seed, i), static_cast<std::uint64_t>(kind))};
      out.push_back({apply_mask(clips[i], spec), std::string(mask_kind_name(kind)), spec.seed, i});
    }
  }
  return out;
}

void write_spectrogram(const std::filesystem::path& path, const Spectrogram& spec,
                       const SpectrogramProvenance& provenance) {
  std::vector<ContainerEntry> entries{{"spectrogram", {spec.mel_bins, spec.frames}, false, spec.values}};
  write_container(path, entries);
  nlohmann::ordered_json sidecar{{"source_clip_id", provenance.source_clip_id},
                                 {"mask_kind", provenance.mask_kind},
                                 {"seed", provenance.seed},
                                 {"frame_length_ms", spec.frame_length_ms},
                                 {"frame_shift_ms", spec.frame_shift_ms}};
  std::ofstream out(path.string() + ".json");
  if (!out) fail(ErrorCode::kIoError, "cannot write sidecar for " + path.string());
  out << sidecar.dump(2) << "\n";
}

Spectrogram read_spectrogram(const std::filesystem::path& path, SpectrogramProvenance* provenance) {
  const auto entries = read_container(path);
  const ContainerEntry& e = find_entry(entries, "spectrogram");
  if (e.shape.size() != 2) fail(ErrorCode::kFormatError, "spectrogram entry must be 2-D");
  Spectrogram spec;
  spec.mel_bins = e.shape[0];
  spec.frames = e.shape[1];
  spec.values = e.values;
  std::ifstream in(path.string() + ".json");
  if (in) {
    const auto sidecar = nlohmann::json::parse(in);
    spec.frame_length_ms = sidecar.value("frame_length_ms", 25.0);
    spec.frame_shift_ms = sidecar.value("frame_shift_ms", 10.0);
    if (provenance) {
      provenance->source_clip_id = sidecar.value("source_clip_id", "");
      provenance->mask_kind = sidecar.value("mask_kind", "");
      provenance->seed = sidecar.value("seed", std::uint64_t{0});
    }
  }
  return spec;
}

}  // namespace afx::dsp
