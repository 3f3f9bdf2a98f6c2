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
#include <string>
#include <vector>

#include "afx/corpus/corpus.hpp"
#include "afx/corpus/synthetic.hpp"

namespace afx::experiment {

// Clips with their audio and, for the personality schema, raw judge scores.
struct Dataset {
  std::vector<corpus::AnnotatedClip> clips;
  std::vector<dsp::Waveform> waveforms;     // parallel to clips
  std::vector<corpus::JudgeScores> scores;  // may be empty

  std::vector<int> labels(corpus::Trait trait) const;
  std::size_t size() const { return clips.size(); }
};

/// A prepared corpus directory: manifest.csv and labels.csv, plus scores.csv
/// when present. Relative audio paths resolve against the directory.
Dataset load_prepared_corpus(const std::filesystem::path& dir);

Dataset dataset_from_synthetic(const corpus::SyntheticCorpus& corpus);

// Recordings segmented and labeled in memory, as prepare_emotion does on disk.
Dataset dataset_from_synthetic(const corpus::SyntheticEmotionCorpus& corpus, double clip_seconds);

// Every trait's labels permuted across clips by one seeded permutation.
Dataset with_shuffled_labels(const Dataset& data, std::uint64_t seed);

/// Writes a personality-schema source corpus: wav/<clip>.wav, manifest.csv
/// and scores.csv.
void write_personality_sources(const std::filesystem::path& dir, const corpus::SyntheticCorpus& corpus);

/// Writes an emotion-schema source corpus: wav/<recording>.wav,
/// recordings.csv (manifest schema) and annotations.csv (continuous schema).
void write_emotion_sources(const std::filesystem::path& dir, const corpus::SyntheticEmotionCorpus& corpus);

/// Personality sources → prepared corpus: binarized labels.csv next to copies
/// of the manifest (paths made absolute) and scores.
void prepare_personality(const std::filesystem::path& manifest, const std::filesystem::path& scores,
                         const std::filesystem::path& out_dir);

/// Emotion sources → prepared corpus: recordings are cut into clip_seconds
/// segments written to out_dir/clips, traces are summarized per annotator and
/// binarized 4 of 6 per dimension.
void prepare_emotion(const std::filesystem::path& recordings, const std::filesystem::path& annotations,
                     const std::filesystem::path& out_dir, double clip_seconds = 10.0);

}  // namespace afx::experiment
