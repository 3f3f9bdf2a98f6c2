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
#include <map>
#include <string_view>
#include <vector>

#include "afx/corpus/corpus.hpp"

namespace afx::corpus {

// How the planted latent label shows up in the waveform.
enum class LabelSignal { kAmplitude, kPitch, kNone };

std::string_view label_signal_name(LabelSignal signal);
LabelSignal parse_label_signal(std::string_view name);

/// Renders one clip. Amplitude: RMS near 0.3 for label 1 and near 0.06 for
/// label 0. Pitch: harmonic tone at 320 Hz versus 160 Hz, equal loudness.
/// None: loudness and pitch drawn independently of the label.
std::vector<double> synthesize_clip(int label, LabelSignal signal, std::size_t samples, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t num_clips = 64;
  std::size_t num_judges = 11;
  std::size_t num_speakers = 0;  // 0 = one speaker per two clips
  std::vector<Trait> traits{kPersonalityTraits.begin(), kPersonalityTraits.end()};
  LabelSignal signal = LabelSignal::kAmplitude;
  double judge_noise = 0.3;      // score noise standard deviation
  double trait_agreement = 1.0;  // chance a trait label copies the latent label
  double clip_seconds = 0.128;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<dsp::Waveform> waveforms;  // source_id == clip_id
  std::vector<AnnotatedClip> clips;      // labels binarized from `scores`
  std::vector<JudgeScores> scores;       // one matrix per trait
  std::vector<int> latent;               // balanced, drives the waveform
  std::map<Trait, std::vector<int>> planted;
};

/// Scores are the planted label plus a per-judge bias and Gaussian noise. On
/// the five-point scale a judge gives round(2 or 4 + bias + noise) clamped
/// to 1..5; on the continuous scale ±0.5 + bias + noise clamped to [-1, 1].
/// With zero noise binarize_majority recovers every planted label.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

struct SyntheticEmotionSpec {
  std::size_t num_recordings = 4;
  std::size_t clips_per_recording = 16;
  std::size_t num_annotators = 6;
  std::vector<Trait> dimensions{Trait::kArousal, Trait::kValence};
  LabelSignal signal = LabelSignal::kAmplitude;
  double annotator_noise = 0.1;
  double trait_agreement = 1.0;
  double clip_seconds = 0.128;
  double trace_rate_hz = 250.0;
  std::uint64_t seed = 0;
};

struct SyntheticEmotionCorpus {
  std::vector<dsp::Waveform> recordings;
  std::vector<ContinuousAnnotation> annotations;
  std::vector<std::string> segment_ids;  // "<recording>_<index>", recording order
  std::vector<int> latent;
  std::map<Trait, std::vector<int>> planted;  // parallel to segment_ids
};

/// Recordings made of back-to-back clips with per-annotator continuous
/// traces covering every clip, in the emotion (RECOLA-like) schema.
SyntheticEmotionCorpus generate_synthetic_emotion(const SyntheticEmotionSpec& spec);

}  // namespace afx::corpus
