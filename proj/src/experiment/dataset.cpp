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

#include "afx/experiment/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "afx/corpus/csv.hpp"
#include "afx/error.hpp"

namespace afx::experiment {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : base / p;
}

std::size_t strict_majority(std::size_t judges) { return judges / 2 + 1; }

std::vector<corpus::Trait> dimensions_of(const std::vector<corpus::ContinuousAnnotation>& annotations) {
  std::vector<corpus::Trait> dims;
  for (const corpus::ContinuousAnnotation& a : annotations) {
    if (std::find(dims.begin(), dims.end(), a.dimension) == dims.end()) dims.push_back(a.dimension);
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

std::vector<corpus::LabelRow> label_rows(const std::vector<corpus::JudgeScores>& scores) {
  std::vector<corpus::LabelRow> rows;
  for (const corpus::JudgeScores& s : scores) {
    const auto labels = corpus::binarize_majority(s, strict_majority(s.num_judges()));
    for (std::size_t c = 0; c < s.num_clips(); ++c) rows.push_back({s.clip_ids[c], s.trait, labels[c]});
  }
  return rows;
}

}  // namespace

std::vector<int> Dataset::labels(corpus::Trait trait) const {
  std::vector<int> out;
  out.reserve(clips.size());
  for (const corpus::AnnotatedClip& c : clips) out.push_back(c.label(trait));
  return out;
}

Dataset load_prepared_corpus(const fs::path& dir) {
  const auto manifest = corpus::read_manifest_csv(dir / "manifest.csv");
  const auto labels = corpus::read_labels_csv(dir / "labels.csv");
  Dataset d;
  d.clips = corpus::join_labels(manifest, labels);
  for (const corpus::AnnotatedClip& c : d.clips) {
    dsp::Waveform w = dsp::load_wav(resolve(dir, c.path));
    w.source_id = c.clip_id;
    d.waveforms.push_back(std::move(w));
  }
  if (fs::exists(dir / "scores.csv")) d.scores = corpus::read_scores_csv(dir / "scores.csv");
  return d;
}

Dataset dataset_from_synthetic(const corpus::SyntheticCorpus& corpus) {
  return Dataset{corpus.clips, corpus.waveforms, corpus.scores};
}

Dataset dataset_from_synthetic(const corpus::SyntheticEmotionCorpus& corpus, double clip_seconds) {
  Dataset d;
  std::vector<corpus::ClipWindow> windows;
  for (const dsp::Waveform& rec : corpus.recordings) {
    for (corpus::Segment& seg : corpus::segment_recording(rec, clip_seconds)) {
      d.clips.push_back({seg.window.clip_id, rec.source_id, {}, {}});
      seg.waveform.source_id = seg.window.clip_id;
      d.waveforms.push_back(std::move(seg.waveform));
      windows.push_back(seg.window);
    }
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < d.clips.size(); ++i) index[d.clips[i].clip_id] = i;
  for (corpus::Trait dim : dimensions_of(corpus.annotations)) {
    d.scores.push_back(corpus::summarize_continuous(corpus.annotations, windows, dim));
    const corpus::JudgeScores& s = d.scores.back();
    const auto labels = corpus::binarize_majority(s, strict_majority(s.num_judges()));
    for (std::size_t c = 0; c < s.num_clips(); ++c) d.clips[index.at(s.clip_ids[c])].labels[dim] = labels[c];
  }
  return d;
}

Dataset with_shuffled_labels(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset out = data;
  for (std::size_t i = 0; i < data.size(); ++i) out.clips[i].labels = data.clips[perm[i]].labels;
  return out;
}

void write_personality_sources(const fs::path& dir, const corpus::SyntheticCorpus& corpus) {
  fs::create_directories(dir / "wav");
  std::vector<corpus::ManifestRow> manifest;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    const std::string rel = "wav/" + corpus.clips[i].clip_id + ".wav";
    dsp::save_wav(dir / rel, corpus.waveforms[i], dsp::WavEncoding::kFloat32);
    manifest.push_back({corpus.clips[i].clip_id, corpus.clips[i].speaker_id, rel,
                        corpus.waveforms[i].duration_seconds()});
  }
  corpus::write_manifest_csv(dir / "manifest.csv", manifest);
  corpus::write_scores_csv(dir / "scores.csv", corpus.scores);
}

void write_emotion_sources(const fs::path& dir, const corpus::SyntheticEmotionCorpus& corpus) {
  fs::create_directories(dir / "wav");
  std::vector<corpus::ManifestRow> manifest;
  for (const dsp::Waveform& rec : corpus.recordings) {
    const std::string rel = "wav/" + rec.source_id + ".wav";
    dsp::save_wav(dir / rel, rec, dsp::WavEncoding::kFloat32);
    manifest.push_back({rec.source_id, rec.source_id, rel, rec.duration_seconds()});
  }
  corpus::write_manifest_csv(dir / "recordings.csv", manifest);
  corpus::write_continuous_csv(dir / "annotations.csv", corpus.annotations);
}

void prepare_personality(const fs::path& manifest_path, const fs::path& scores_path, const fs::path& out_dir) {
  auto manifest = corpus::read_manifest_csv(manifest_path);
  const auto scores = corpus::read_scores_csv(scores_path);
  for (const corpus::JudgeScores& s : scores) {
    const std::set<std::string> scored(s.clip_ids.begin(), s.clip_ids.end());
    for (const corpus::ManifestRow& m : manifest) {
      if (!scored.contains(m.clip_id)) {
        fail(ErrorCode::kMissingAnnotation, "clip " + m.clip_id + " has no " + std::string(corpus::trait_name(s.trait)) +
                                                " scores");
      }
    }
  }
  const fs::path base = fs::absolute(manifest_path).parent_path();
  for (corpus::ManifestRow& m : manifest) m.path = resolve(base, m.path).lexically_normal().string();
  fs::create_directories(out_dir);
  corpus::write_manifest_csv(out_dir / "manifest.csv", manifest);
  corpus::write_scores_csv(out_dir / "scores.csv", scores);
  corpus::write_labels_csv(out_dir / "labels.csv", label_rows(scores));
}

void prepare_emotion(const fs::path& recordings_path, const fs::path& annotations_path, const fs::path& out_dir,
                     double clip_seconds) {
  const auto recordings = corpus::read_manifest_csv(recordings_path);
  const auto annotations = corpus::read_continuous_csv(annotations_path);
  const fs::path base = fs::absolute(recordings_path).parent_path();
  fs::create_directories(out_dir / "clips");

  std::vector<corpus::ClipWindow> windows;
  std::vector<corpus::ManifestRow> manifest;
  for (const corpus::ManifestRow& rec : recordings) {
    dsp::Waveform w = dsp::load_wav(resolve(base, rec.path));
    w.source_id = rec.clip_id;
    for (const corpus::Segment& seg : corpus::segment_recording(w, clip_seconds)) {
      const std::string rel = "clips/" + seg.window.clip_id + ".wav";
      dsp::save_wav(out_dir / rel, seg.waveform, dsp::WavEncoding::kFloat32);
      manifest.push_back({seg.window.clip_id, rec.speaker_id, rel, seg.waveform.duration_seconds()});
      windows.push_back(seg.window);
    }
  }
  std::vector<corpus::JudgeScores> scores;
  for (corpus::Trait d : dimensions_of(annotations)) scores.push_back(corpus::summarize_continuous(annotations, windows, d));
  corpus::write_manifest_csv(out_dir / "manifest.csv", manifest);
  corpus::write_scores_csv(out_dir / "scores.csv", scores);
  corpus::write_labels_csv(out_dir / "labels.csv", label_rows(scores));
}

}  // namespace afx::experiment
