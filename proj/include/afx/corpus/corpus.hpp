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

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afx/dsp/waveform.hpp"

namespace afx::corpus {

enum class Trait { kEX, kAG, kCO, kNE, kOP, kArousal, kValence };

inline constexpr std::array<Trait, 5> kPersonalityTraits{Trait::kEX, Trait::kAG, Trait::kCO, Trait::kNE,
                                                         Trait::kOP};

std::string_view trait_name(Trait trait);
Trait parse_trait(std::string_view name);
bool is_emotion(Trait trait);

enum class Scale { kFivePoint, kContinuous };

Scale scale_for(Trait trait);
// 11 judges for the personality schema, 6 annotators for the emotion schema.
std::size_t schema_judges(Trait trait);
// Smallest strict majority of the schema: 6 of 11, 4 of 6.
std::size_t default_majority(Trait trait);

// Judge-major score matrix: values[judge * num_clips + clip].
struct JudgeScores {
  Trait trait = Trait::kEX;
  Scale scale = Scale::kFivePoint;
  std::vector<std::string> judge_ids;
  std::vector<std::string> clip_ids;
  std::vector<double> values;

  std::size_t num_judges() const { return judge_ids.size(); }
  std::size_t num_clips() const { return clip_ids.size(); }
  double at(std::size_t judge, std::size_t clip) const { return values[judge * clip_ids.size() + clip]; }
  double& at(std::size_t judge, std::size_t clip) { return values[judge * clip_ids.size() + clip]; }

  // Per-clip mean over judges, the 5-scale statistic used for correlation.
  std::vector<double> clip_means() const;

  // Throws ShapeError on size mismatch and LabelError on out-of-scale entries.
  void validate() const;
};

JudgeScores make_scores(Trait trait, std::size_t num_judges, std::size_t num_clips);

struct AnnotatedClip {
  std::string clip_id;
  std::string speaker_id;
  std::string path;
  std::map<Trait, int> labels;

  int label(Trait trait) const;  // LabelError when absent
};

/// A clip is labeled 1 when at least `majority` judges scored it strictly
/// above that judge's own mean over every clip of the matrix.
std::vector<int> binarize_majority(const JudgeScores& scores, std::size_t majority);

struct TracePoint {
  double time_s = 0.0;
  double value = 0.0;
};

/// Mean of the trace samples with time in [start_s, end_s).
double summarize_trace(std::span<const TracePoint> trace, double start_s, double end_s);

struct ContinuousAnnotation {
  std::string clip_source_id;
  std::string annotator_id;
  Trait dimension = Trait::kArousal;
  double time_s = 0.0;
  double value = 0.0;
};

struct ClipWindow {
  std::string clip_id;
  std::string source_id;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// One score per annotator per clip window, for a single dimension. Throws
/// MissingAnnotation when an annotator has no samples inside a window.
JudgeScores summarize_continuous(std::span<const ContinuousAnnotation> annotations,
                                 std::span<const ClipWindow> windows, Trait dimension);

struct Segment {
  dsp::Waveform waveform;
  ClipWindow window;
};

/// Consecutive non-overlapping clips of exactly clip_seconds; the trailing
/// remainder is dropped. Clip ids are "<source>_<index>" with three digits.
std::vector<Segment> segment_recording(const dsp::Waveform& wave, double clip_seconds = 10.0);

}  // namespace afx::corpus
