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
#include <vector>

#include "afx/dsp/waveform.hpp"
#include "afx/tensor/tensor.hpp"

namespace afx::dsp {

// Log mel energies, stored mel-bin-major: values[bin * frames + frame].
struct Spectrogram {
  std::size_t mel_bins = 0;
  std::size_t frames = 0;
  std::vector<double> values;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;

  double& at(std::size_t bin, std::size_t frame) { return values[bin * frames + frame]; }
  double at(std::size_t bin, std::size_t frame) const { return values[bin * frames + frame]; }
  Tensor to_tensor() const;  // [mel_bins × frames]

  bool operator==(const Spectrogram&) const = default;
};

struct MelOptions {
  std::size_t mel_bins = 80;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 = Nyquist
  double log_floor = 1e-10;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

std::size_t frame_count(std::size_t num_samples, std::size_t frame_length, std::size_t frame_shift);

/// Triangular mel filter bank over the power spectrum of an `fft_size`
/// transform: weights[bin * (fft_size/2 + 1) + k].
struct MelFilterBank {
  std::size_t mel_bins = 0;
  std::size_t fft_size = 0;
  std::vector<double> centers_hz;  // one per mel bin
  std::vector<double> weights;

  static MelFilterBank build(const MelOptions& options, int sample_rate, std::size_t fft_size);
};

/// Hann-windowed STFT → power spectrum → mel filter bank → log(max(e, floor)).
/// Throws InputTooShort when the waveform holds less than one frame.
Spectrogram log_mel(const Waveform& wave, const MelOptions& options = {});

}  // namespace afx::dsp
