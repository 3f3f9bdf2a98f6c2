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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "afx/dsp/waveform.hpp"
#include "afx/error.hpp"

namespace afx::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(std::span<const std::uint8_t> bytes, std::size_t pos) {
  if (pos + sizeof(T) > bytes.size()) fail(ErrorCode::kFormatError, "WAV chunk truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  return value;
}

bool tag_is(std::span<const std::uint8_t> bytes, std::size_t pos, const char* tag) {
  return pos + 4 <= bytes.size() && std::memcmp(bytes.data() + pos, tag, 4) == 0;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

std::vector<double> resample_linear(std::span<const double> samples, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) fail(ErrorCode::kInvalidArgument, "sample rates must be positive");
  if (from_rate == to_rate || samples.empty()) return {samples.begin(), samples.end()};
  const double ratio = static_cast<double>(from_rate) / static_cast<double>(to_rate);
  const auto out_len = static_cast<std::size_t>(
      static_cast<double>(samples.size() - 1) * static_cast<double>(to_rate) / from_rate) + 1;
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto left = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(left);
    const double a = samples[std::min(left, samples.size() - 1)];
    const double b = samples[std::min(left + 1, samples.size() - 1)];
    out[i] = a + (b - a) * frac;
  }
  return out;
}

Waveform decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  if (!tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    fail(ErrorCode::kFormatError, "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> payload;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto size = read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) fail(ErrorCode::kFormatError, "WAV chunk runs past end of file");
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) fail(ErrorCode::kFormatError, "fmt chunk too small");
      format = read_le<std::uint16_t>(bytes, body);
      channels = read_le<std::uint16_t>(bytes, body + 2);
      rate = read_le<std::uint32_t>(bytes, body + 4);
      bits = read_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorCode::kFormatError, "extensible fmt chunk too small");
        format = read_le<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      payload = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) fail(ErrorCode::kFormatError, "WAV lacks fmt or data chunk");
  if (channels == 0 || rate == 0) fail(ErrorCode::kFormatError, "WAV declares zero channels or rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  const bool float64 = format == kFormatFloat && bits == 64;
  if (!pcm16 && !float32 && !float64) {
    fail(ErrorCode::kUnsupportedCodec, "format tag " + std::to_string(format) + " with " +
                                           std::to_string(bits) + " bits");
  }
  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = payload.size() / frame_bytes;

  std::vector<double> mono(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = f * frame_bytes + c * width;
      if (pcm16) acc += read_le<std::int16_t>(payload, at) / 32768.0;
      else if (float32) acc += read_le<float>(payload, at);
      else acc += read_le<double>(payload, at);
    }
    mono[f] = acc / channels;
  }
  for (double v : mono) {
    if (!std::isfinite(v)) fail(ErrorCode::kFormatError, "non-finite sample in WAV payload");
  }

  Waveform wave;
  wave.source_id = std::move(source_id);
  wave.samples = resample_linear(mono, static_cast<int>(rate), kCanonicalSampleRate);
  wave.sample_rate = kCanonicalSampleRate;
  double peak = 0.0;
  for (double v : wave.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    for (double& v : wave.samples) v /= peak;
  }
  return wave;
}

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.stem().string());
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int channels,
                                     int sample_rate, WavEncoding encoding) {
  if (channels <= 0 || sample_rate <= 0) fail(ErrorCode::kInvalidArgument, "bad WAV geometry");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put<std::uint32_t>(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(channels));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate * channels * (bits / 8)));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  put<std::uint16_t>(out, bits);
  put_tag(out, "data");
  put<std::uint32_t>(out, data_bytes);
  for (double v : interleaved) {
    const double clamped = std::clamp(v, -1.0, 1.0);
    if (pcm) put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clamped * 32767.0)));
    else put<float>(out, static_cast<float>(clamped));
  }
  return out;
}

void save_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  const auto bytes = encode_wav(wave.samples, 1, wave.sample_rate, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace afx::dsp
