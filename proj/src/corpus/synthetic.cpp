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

#include "afx/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "afx/error.hpp"

namespace afx::corpus {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(std::mt19937_64& rng, double sigma) {
  return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
}

std::vector<int> balanced_latent(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> latent(n, 0);
  std::fill(latent.begin(), latent.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  std::shuffle(latent.begin(), latent.end(), rng);
  return latent;
}

std::vector<int> plant(const std::vector<int>& latent, double agreement, std::mt19937_64& rng) {
  std::vector<int> out(latent.size());
  std::bernoulli_distribution copy(std::clamp(agreement, 0.0, 1.0)), coin(0.5);
  for (std::size_t i = 0; i < latent.size(); ++i) out[i] = copy(rng) ? latent[i] : coin(rng);
  return out;
}

void scale_to_rms(std::vector<double>& x, double rms) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double current = std::sqrt(sq / static_cast<double>(x.size()));
  const double g = current > 0.0 ? rms / current : 0.0;
  for (double& v : x) v = std::clamp(v * g, -1.0, 1.0);
}

}  // namespace

std::string_view label_signal_name(LabelSignal signal) {
  switch (signal) {
    case LabelSignal::kAmplitude: return "amplitude";
    case LabelSignal::kPitch: return "pitch";
    case LabelSignal::kNone: return "none";
  }
  return "?";
}

LabelSignal parse_label_signal(std::string_view name) {
  for (LabelSignal s : {LabelSignal::kAmplitude, LabelSignal::kPitch, LabelSignal::kNone}) {
    if (label_signal_name(s) == name) return s;
  }
  fail(ErrorCode::kInvalidArgument, "unknown label signal '" + std::string(name) + "'");
}

std::vector<double> synthesize_clip(int label, LabelSignal signal, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double rate = dsp::kCanonicalSampleRate;
  std::vector<double> x(samples, 0.0);
  const double two_pi = 2.0 * std::numbers::pi;

  if (signal == LabelSignal::kAmplitude) {
    for (int k = 0; k < 3; ++k) {
      const double f = uniform(rng, 100.0, 2000.0), phase = uniform(rng, 0.0, two_pi);
      for (std::size_t i = 0; i < samples; ++i) x[i] += std::sin(two_pi * f * i / rate + phase);
    }
    for (double& v : x) v += gaussian(rng, 0.5);
    scale_to_rms(x, label ? uniform(rng, 0.25, 0.35) : uniform(rng, 0.04, 0.08));
    return x;
  }

  const double f0 = signal == LabelSignal::kPitch ? (label ? 320.0 : 160.0) * uniform(rng, 0.95, 1.05)
                                                  : uniform(rng, 150.0, 330.0);
  const double phase = uniform(rng, 0.0, two_pi);
  for (int h = 1; h <= 4; ++h) {
    for (std::size_t i = 0; i < samples; ++i) x[i] += std::sin(two_pi * h * f0 * i / rate + h * phase) / h;
  }
  for (double& v : x) v += gaussian(rng, 0.05);
  scale_to_rms(x, signal == LabelSignal::kPitch ? 0.2 : uniform(rng, 0.04, 0.35));
  return x;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.num_clips < 2 || spec.num_judges == 0 || spec.traits.empty()) {
    fail(ErrorCode::kInvalidArgument, "synthetic corpus needs clips, judges and traits");
  }
  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus out;
  out.latent = balanced_latent(spec.num_clips, rng);
  const std::size_t speakers = spec.num_speakers ? spec.num_speakers : std::max<std::size_t>(1, spec.num_clips / 2);
  const auto samples = static_cast<std::size_t>(std::llround(spec.clip_seconds * dsp::kCanonicalSampleRate));

  char buf[32];
  out.clips.resize(spec.num_clips);
  for (std::size_t c = 0; c < spec.num_clips; ++c) {
    std::snprintf(buf, sizeof buf, "clip_%04zu", c);
    out.clips[c].clip_id = buf;
    std::snprintf(buf, sizeof buf, "spk_%03zu", c % speakers);
    out.clips[c].speaker_id = buf;
    dsp::Waveform w;
    w.source_id = out.clips[c].clip_id;
    w.samples = synthesize_clip(out.latent[c], spec.signal, samples, mix(spec.seed, c));
    out.waveforms.push_back(std::move(w));
  }

  for (Trait trait : spec.traits) {
    std::vector<int> planted = plant(out.latent, spec.trait_agreement, rng);
    JudgeScores s = make_scores(trait, spec.num_judges, spec.num_clips);
    const bool five = s.scale == Scale::kFivePoint;
    for (std::size_t j = 0; j < spec.num_judges; ++j) {
      const double bias = five ? uniform(rng, -0.9, 0.9) : uniform(rng, -0.3, 0.3);
      for (std::size_t c = 0; c < spec.num_clips; ++c) {
        const double noise = gaussian(rng, spec.judge_noise);
        s.at(j, c) = five ? std::clamp(std::round((planted[c] ? 4.0 : 2.0) + bias + noise), 1.0, 5.0)
                          : std::clamp((planted[c] ? 0.5 : -0.5) + bias + noise, -1.0, 1.0);
      }
    }
    const std::vector<int> labels = binarize_majority(s, spec.num_judges / 2 + 1);
    for (std::size_t c = 0; c < spec.num_clips; ++c) out.clips[c].labels[trait] = labels[c];
    out.planted[trait] = std::move(planted);
    out.scores.push_back(std::move(s));
  }
  return out;
}

SyntheticEmotionCorpus generate_synthetic_emotion(const SyntheticEmotionSpec& spec) {
  if (spec.num_recordings == 0 || spec.clips_per_recording == 0 || spec.num_annotators == 0 ||
      !(spec.trace_rate_hz > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "synthetic emotion corpus needs recordings, clips and annotators");
  }
  std::mt19937_64 rng(mix(spec.seed, 0xE0));
  SyntheticEmotionCorpus out;
  const std::size_t total = spec.num_recordings * spec.clips_per_recording;
  out.latent = balanced_latent(total, rng);
  const auto clip_samples = static_cast<std::size_t>(std::llround(spec.clip_seconds * dsp::kCanonicalSampleRate));
  const double clip_duration = static_cast<double>(clip_samples) / dsp::kCanonicalSampleRate;
  for (Trait d : spec.dimensions) out.planted[d] = plant(out.latent, spec.trait_agreement, rng);

  char buf[32];
  for (std::size_t r = 0; r < spec.num_recordings; ++r) {
    dsp::Waveform rec;
    std::snprintf(buf, sizeof buf, "rec_%02zu", r);
    rec.source_id = buf;
    for (std::size_t i = 0; i < spec.clips_per_recording; ++i) {
      const std::size_t seg = r * spec.clips_per_recording + i;
      std::snprintf(buf, sizeof buf, "_%03zu", i);
      out.segment_ids.push_back(rec.source_id + buf);
      const auto clip = synthesize_clip(out.latent[seg], spec.signal, clip_samples, mix(spec.seed, seg));
      rec.samples.insert(rec.samples.end(), clip.begin(), clip.end());
    }
    out.recordings.push_back(std::move(rec));
  }

  const double duration = clip_duration * static_cast<double>(spec.clips_per_recording);
  const auto points = static_cast<std::size_t>(std::floor(duration * spec.trace_rate_hz));
  for (Trait d : spec.dimensions) {
    const auto& planted = out.planted[d];
    for (std::size_t a = 0; a < spec.num_annotators; ++a) {
      std::snprintf(buf, sizeof buf, "ann_%zu", a);
      const std::string annotator = buf;
      const double bias = uniform(rng, -0.3, 0.3);
      for (std::size_t r = 0; r < spec.num_recordings; ++r) {
        for (std::size_t k = 0; k < points; ++k) {
          const double t = static_cast<double>(k) / spec.trace_rate_hz;
          // Same window arithmetic as segment_recording.
          std::size_t i = std::min(static_cast<std::size_t>(t / clip_duration), spec.clips_per_recording - 1);
          while (i + 1 < spec.clips_per_recording &&
                 t >= static_cast<double>((i + 1) * clip_samples) / dsp::kCanonicalSampleRate) {
            ++i;
          }
          while (i > 0 && t < static_cast<double>(i * clip_samples) / dsp::kCanonicalSampleRate) --i;
          const int label = planted[r * spec.clips_per_recording + i];
          const double v = std::clamp((label ? 0.5 : -0.5) + bias + gaussian(rng, spec.annotator_noise), -1.0, 1.0);
          out.annotations.push_back({out.recordings[r].source_id, annotator, d, t, v});
        }
      }
    }
  }
  return out;
}

}  // namespace afx::corpus
