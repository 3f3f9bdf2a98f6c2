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

#include "afx/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "afx/error.hpp"

namespace afx::corpus {

namespace {

constexpr std::array<std::pair<Trait, std::string_view>, 7> kTraitNames{{
    {Trait::kEX, "EX"},
    {Trait::kAG, "AG"},
    {Trait::kCO, "CO"},
    {Trait::kNE, "NE"},
    {Trait::kOP, "OP"},
    {Trait::kArousal, "Arousal"},
    {Trait::kValence, "Valence"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view trait_name(Trait trait) {
  for (const auto& [t, name] : kTraitNames) {
    if (t == trait) return name;
  }
  return "?";
}

Trait parse_trait(std::string_view name) {
  for (const auto& [t, n] : kTraitNames) {
    if (iequals(n, name)) return t;
  }
  fail(ErrorCode::kInvalidArgument, "unknown trait '" + std::string(name) + "'");
}

bool is_emotion(Trait trait) { return trait == Trait::kArousal || trait == Trait::kValence; }

Scale scale_for(Trait trait) { return is_emotion(trait) ? Scale::kContinuous : Scale::kFivePoint; }

std::size_t schema_judges(Trait trait) { return is_emotion(trait) ? 6 : 11; }

std::size_t default_majority(Trait trait) { return schema_judges(trait) / 2 + 1; }

std::vector<double> JudgeScores::clip_means() const {
  std::vector<double> out(num_clips(), 0.0);
  for (std::size_t c = 0; c < num_clips(); ++c) {
    for (std::size_t j = 0; j < num_judges(); ++j) out[c] += at(j, c);
    out[c] /= static_cast<double>(num_judges());
  }
  return out;
}

void JudgeScores::validate() const {
  if (values.size() != judge_ids.size() * clip_ids.size()) {
    fail(ErrorCode::kShapeError, "score matrix holds " + std::to_string(values.size()) + " values for " +
                                     std::to_string(judge_ids.size()) + " judges x " +
                                     std::to_string(clip_ids.size()) + " clips");
  }
  for (double v : values) {
    const bool ok = scale == Scale::kFivePoint ? (v >= 1.0 && v <= 5.0 && v == std::round(v))
                                               : (v >= -1.0 && v <= 1.0);
    if (!ok) {
      fail(ErrorCode::kLabelError, "score " + std::to_string(v) + " is off the " +
                                       std::string(trait_name(trait)) + " scale");
    }
  }
}

JudgeScores make_scores(Trait trait, std::size_t num_judges, std::size_t num_clips) {
  JudgeScores s;
  s.trait = trait;
  s.scale = scale_for(trait);
  char buf[32];
  for (std::size_t j = 0; j < num_judges; ++j) {
    std::snprintf(buf, sizeof buf, "judge_%02zu", j);
    s.judge_ids.emplace_back(buf);
  }
  for (std::size_t c = 0; c < num_clips; ++c) {
    std::snprintf(buf, sizeof buf, "clip_%04zu", c);
    s.clip_ids.emplace_back(buf);
  }
  s.values.assign(num_judges * num_clips, 0.0);
  return s;
}

int AnnotatedClip::label(Trait trait) const {
  auto it = labels.find(trait);
  if (it == labels.end()) {
    fail(ErrorCode::kLabelError, "clip " + clip_id + " has no " + std::string(trait_name(trait)) + " label");
  }
  return it->second;
}

std::vector<int> binarize_majority(const JudgeScores& scores, std::size_t majority) {
  if (scores.values.size() != scores.num_judges() * scores.num_clips()) {
    fail(ErrorCode::kShapeError, "score matrix is incomplete");
  }
  if (majority == 0 || majority > scores.num_judges()) {
    fail(ErrorCode::kInvalidMajority, "majority " + std::to_string(majority) + " with " +
                                          std::to_string(scores.num_judges()) + " judges");
  }
  const std::size_t n = scores.num_clips();
  std::vector<std::size_t> above(n, 0);
  for (std::size_t j = 0; j < scores.num_judges(); ++j) {
    // Mean as first score plus mean deviation: exact for constant rows, so
    // equal scores never sit above their own average.
    const double anchor = scores.at(j, 0);
    double dev = 0.0;
    for (std::size_t c = 0; c < n; ++c) dev += scores.at(j, c) - anchor;
    const double reference = anchor + dev / static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) above[c] += scores.at(j, c) > reference;
  }
  std::vector<int> labels(n);
  for (std::size_t c = 0; c < n; ++c) labels[c] = above[c] >= majority ? 1 : 0;
  return labels;
}

double summarize_trace(std::span<const TracePoint> trace, double start_s, double end_s) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const TracePoint& p : trace) {
    if (p.time_s >= start_s && p.time_s < end_s) {
      sum += p.value;
      ++count;
    }
  }
  if (count == 0) {
    fail(ErrorCode::kMissingAnnotation, "no trace samples in [" + std::to_string(start_s) + ", " +
                                            std::to_string(end_s) + ")");
  }
  return sum / static_cast<double>(count);
}

JudgeScores summarize_continuous(std::span<const ContinuousAnnotation> annotations,
                                 std::span<const ClipWindow> windows, Trait dimension) {
  std::vector<std::string> annotators;
  std::unordered_map<std::string, std::size_t> annotator_index;
  // (source, annotator) -> trace
  std::map<std::pair<std::string, std::size_t>, std::vector<TracePoint>> traces;
  for (const ContinuousAnnotation& a : annotations) {
    if (a.dimension != dimension) continue;
    auto [it, inserted] = annotator_index.emplace(a.annotator_id, annotators.size());
    if (inserted) annotators.push_back(a.annotator_id);
    traces[{a.clip_source_id, it->second}].push_back({a.time_s, a.value});
  }
  if (annotators.empty()) {
    fail(ErrorCode::kMissingAnnotation, "no " + std::string(trait_name(dimension)) + " annotations");
  }
  for (auto& [key, trace] : traces) {
    std::stable_sort(trace.begin(), trace.end(),
                     [](const TracePoint& a, const TracePoint& b) { return a.time_s < b.time_s; });
  }

  JudgeScores out;
  out.trait = dimension;
  out.scale = Scale::kContinuous;
  out.judge_ids = annotators;
  for (const ClipWindow& w : windows) out.clip_ids.push_back(w.clip_id);
  out.values.assign(annotators.size() * windows.size(), 0.0);
  for (std::size_t j = 0; j < annotators.size(); ++j) {
    for (std::size_t c = 0; c < windows.size(); ++c) {
      const ClipWindow& w = windows[c];
      auto it = traces.find({w.source_id, j});
      if (it == traces.end()) {
        fail(ErrorCode::kMissingAnnotation, "annotator " + annotators[j] + " has no trace for " + w.source_id);
      }
      const auto& trace = it->second;
      auto lo = std::lower_bound(trace.begin(), trace.end(), w.start_s,
                                 [](const TracePoint& p, double t) { return p.time_s < t; });
      auto hi = std::lower_bound(lo, trace.end(), w.end_s,
                                 [](const TracePoint& p, double t) { return p.time_s < t; });
      try {
        out.at(j, c) = summarize_trace(std::span(lo, hi), w.start_s, w.end_s);
      } catch (const Error& e) {
        fail(e.code(), "annotator " + annotators[j] + ", clip " + w.clip_id + ": " + e.what());
      }
    }
  }
  return out;
}

std::vector<Segment> segment_recording(const dsp::Waveform& wave, double clip_seconds) {
  if (!(clip_seconds > 0.0)) fail(ErrorCode::kInvalidArgument, "clip length must be positive");
  const auto clip_samples = static_cast<std::size_t>(std::llround(clip_seconds * wave.sample_rate));
  if (clip_samples == 0 || wave.samples.size() < clip_samples) {
    fail(ErrorCode::kInputTooShort, wave.source_id + " lasts " + std::to_string(wave.duration_seconds()) +
                                        " s, shorter than one " + std::to_string(clip_seconds) + " s clip");
  }
  const std::size_t count = wave.samples.size() / clip_samples;
  std::vector<Segment> out;
  out.reserve(count);
  char suffix[24];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(suffix, sizeof suffix, "_%03zu", i);
    Segment s;
    s.window.clip_id = wave.source_id + suffix;
    s.window.source_id = wave.source_id;
    s.window.start_s = static_cast<double>(i * clip_samples) / wave.sample_rate;
    s.window.end_s = static_cast<double>((i + 1) * clip_samples) / wave.sample_rate;
    s.waveform.sample_rate = wave.sample_rate;
    s.waveform.source_id = s.window.clip_id;
    const auto begin = wave.samples.begin() + static_cast<std::ptrdiff_t>(i * clip_samples);
    s.waveform.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(clip_samples));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace afx::corpus
