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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace afx::dsp {

inline constexpr int kCanonicalSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = kCanonicalSampleRate;
  std::string source_id;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads RIFF/WAVE (PCM 16-bit or IEEE float 32/64, mono or multichannel),
/// averages channels, resamples to 16 kHz and scales into [-1, 1].
/// Malformed files raise FormatError; other codecs raise UnsupportedCodec.
Waveform load_wav(const std::filesystem::path& path);
Waveform decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});

void save_wav(const std::filesystem::path& path, const Waveform& wave,
              WavEncoding encoding = WavEncoding::kPcm16);
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int channels,
                                     int sample_rate, WavEncoding encoding);

// Linear interpolation; output length floor((n - 1) * to / from) + 1.
std::vector<double> resample_linear(std::span<const double> samples, int from_rate, int to_rate);

}  // namespace afx::dsp
