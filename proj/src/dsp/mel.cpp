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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "afx/dsp/spectrogram.hpp"
#include "afx/error.hpp"

namespace afx::dsp {

namespace {

// FFTW planning is not thread safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Tensor Spectrogram::to_tensor() const { return Tensor({mel_bins, frames}, values); }

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t frame_count(std::size_t num_samples, std::size_t frame_length, std::size_t frame_shift) {
  if (num_samples < frame_length) {
    fail(ErrorCode::kInputTooShort, std::to_string(num_samples) + " samples is shorter than one " +
                                        std::to_string(frame_length) + "-sample frame");
  }
  return (num_samples - frame_length) / frame_shift + 1;
}

MelFilterBank MelFilterBank::build(const MelOptions& options, int sample_rate, std::size_t fft_size) {
  const double nyquist = sample_rate / 2.0;
  const double high = options.high_hz > 0.0 ? options.high_hz : nyquist;
  if (options.mel_bins == 0 || !(high > options.low_hz) || high > nyquist) {
    fail(ErrorCode::kInvalidArgument, "bad mel filter bank range");
  }
  MelFilterBank bank;
  bank.mel_bins = options.mel_bins;
  bank.fft_size = fft_size;
  const std::size_t num_fft_bins = fft_size / 2 + 1;
  bank.weights.assign(options.mel_bins * num_fft_bins, 0.0);

  const double mel_lo = hz_to_mel(options.low_hz);
  const double mel_hi = hz_to_mel(high);
  std::vector<double> edges(options.mel_bins + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(options.mel_bins + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  for (std::size_t m = 0; m < options.mel_bins; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    bank.centers_hz.push_back(center);
    for (std::size_t k = 0; k < num_fft_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) w = (f - left) / (center - left);
      else if (f > center && f < right) w = (right - f) / (right - center);
      bank.weights[m * num_fft_bins + k] = w;
    }
  }
  return bank;
}

Spectrogram log_mel(const Waveform& wave, const MelOptions& options) {
  if (wave.sample_rate <= 0) fail(ErrorCode::kInvalidArgument, "waveform has no sample rate");
  const auto frame_length = static_cast<std::size_t>(std::lround(options.frame_length_ms * wave.sample_rate / 1000.0));
  const auto frame_shift = static_cast<std::size_t>(std::lround(options.frame_shift_ms * wave.sample_rate / 1000.0));
  if (frame_length == 0 || frame_shift == 0) fail(ErrorCode::kInvalidArgument, "frame geometry rounds to zero");
  const std::size_t frames = frame_count(wave.samples.size(), frame_length, frame_shift);
  const std::size_t fft_size = next_pow2(frame_length);
  const MelFilterBank bank = MelFilterBank::build(options, wave.sample_rate, fft_size);
  const std::size_t num_fft_bins = fft_size / 2 + 1;

  std::vector<double> window(frame_length);
  for (std::size_t n = 0; n < frame_length; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                     static_cast<double>(frame_length - 1));
  }

  Spectrogram spec;
  spec.mel_bins = options.mel_bins;
  spec.frames = frames;
  spec.frame_length_ms = options.frame_length_ms;
  spec.frame_shift_ms = options.frame_shift_ms;
  spec.values.resize(options.mel_bins * frames);

  RealFft fft(fft_size);
  std::vector<double> power;
  for (std::size_t t = 0; t < frames; ++t) {
    double* in = fft.input();
    const double* frame = wave.samples.data() + t * frame_shift;
    for (std::size_t n = 0; n < frame_length; ++n) in[n] = frame[n] * window[n];
    std::fill(in + frame_length, in + fft_size, 0.0);
    fft.power(power);
    for (std::size_t m = 0; m < options.mel_bins; ++m) {
      const double* w = bank.weights.data() + m * num_fft_bins;
      double energy = 0.0;
      for (std::size_t k = 0; k < num_fft_bins; ++k) energy += w[k] * power[k];
      spec.at(m, t) = std::log(std::max(energy, options.log_floor));
    }
  }
  return spec;
}

}  // namespace afx::dsp
