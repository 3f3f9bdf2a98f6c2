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

#include "afx/corpus/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "afx/error.hpp"

namespace afx::corpus {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::filesystem::path& path, const std::vector<std::string_view>& expected) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) table.header[0].erase(0, 3);
      continue;
    }
    if (fields.size() != table.header.size()) {
      fail(ErrorCode::kFormatError, fmt::format("{}:{}: expected {} fields, found {}", path.string(), number,
                                                table.header.size(), fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(number);
  }
  for (std::string_view column : expected) {
    if (std::find(table.header.begin(), table.header.end(), column) == table.header.end()) {
      fail(ErrorCode::kFormatError, fmt::format("{}: missing column '{}'", path.string(), column));
    }
  }
  return table;
}

std::size_t column(const CsvTable& t, std::string_view name) {
  return static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), name) - t.header.begin());
}

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kFormatError, fmt::format("{}:{}: '{}' is not a number", path.string(), line, text));
  }
  return v;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

// Shortest text that parses back to the same double.
std::string number(double v) { return fmt::format("{}", v); }

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

void write_scores_csv(const std::filesystem::path& path, std::span<const JudgeScores> scores) {
  auto out = open_out(path);
  out << "clip_id,judge_id,trait,score\n";
  for (const JudgeScores& s : scores) {
    for (std::size_t c = 0; c < s.num_clips(); ++c) {
      for (std::size_t j = 0; j < s.num_judges(); ++j) {
        out << quote(s.clip_ids[c]) << ',' << quote(s.judge_ids[j]) << ',' << trait_name(s.trait) << ','
            << number(s.at(j, c)) << '\n';
      }
    }
  }
}

std::vector<JudgeScores> read_scores_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, {"clip_id", "judge_id", "trait", "score"});
  const std::size_t ci = column(t, "clip_id"), ji = column(t, "judge_id"), ti = column(t, "trait"),
                    si = column(t, "score");
  struct Building {
    std::vector<std::string> clips, judges;
    std::unordered_map<std::string, std::size_t> clip_index, judge_index;
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
  };
  std::vector<Trait> order;
  std::map<Trait, Building> by_trait;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const Trait trait = parse_trait(row[ti]);
    auto [it, fresh] = by_trait.try_emplace(trait);
    if (fresh) order.push_back(trait);
    Building& b = it->second;
    auto [c, new_clip] = b.clip_index.emplace(row[ci], b.clips.size());
    if (new_clip) b.clips.push_back(row[ci]);
    auto [j, new_judge] = b.judge_index.emplace(row[ji], b.judges.size());
    if (new_judge) b.judges.push_back(row[ji]);
    if (!b.cells.emplace(std::pair{j->second, c->second}, parse_double(row[si], path, t.line_numbers[r])).second) {
      fail(ErrorCode::kFormatError, fmt::format("{}:{}: duplicate score for judge {} on clip {}", path.string(),
                                                t.line_numbers[r], row[ji], row[ci]));
    }
  }
  std::vector<JudgeScores> out;
  for (Trait trait : order) {
    const Building& b = by_trait[trait];
    JudgeScores s;
    s.trait = trait;
    s.scale = scale_for(trait);
    s.judge_ids = b.judges;
    s.clip_ids = b.clips;
    s.values.assign(b.judges.size() * b.clips.size(), 0.0);
    for (std::size_t j = 0; j < b.judges.size(); ++j) {
      for (std::size_t c = 0; c < b.clips.size(); ++c) {
        auto cell = b.cells.find({j, c});
        if (cell == b.cells.end()) {
          fail(ErrorCode::kMissingAnnotation, fmt::format("{}: no {} score from judge {} for clip {}", path.string(),
                                                          trait_name(trait), b.judges[j], b.clips[c]));
        }
        s.at(j, c) = cell->second;
      }
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

void write_manifest_csv(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  auto out = open_out(path);
  out << "clip_id,speaker_id,path,duration_s\n";
  for (const ManifestRow& r : rows) {
    out << quote(r.clip_id) << ',' << quote(r.speaker_id) << ',' << quote(r.path) << ',' << number(r.duration_s)
        << '\n';
  }
}

std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, {"clip_id", "speaker_id", "path", "duration_s"});
  const std::size_t ci = column(t, "clip_id"), si = column(t, "speaker_id"), pi = column(t, "path"),
                    di = column(t, "duration_s");
  std::vector<ManifestRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.push_back({row[ci], row[si], row[pi], parse_double(row[di], path, t.line_numbers[r])});
  }
  return out;
}

void write_continuous_csv(const std::filesystem::path& path, std::span<const ContinuousAnnotation> rows) {
  auto out = open_out(path);
  out << "clip_source_id,annotator_id,dimension,time_s,value\n";
  for (const ContinuousAnnotation& a : rows) {
    out << quote(a.clip_source_id) << ',' << quote(a.annotator_id) << ',' << trait_name(a.dimension) << ','
        << number(a.time_s) << ',' << number(a.value) << '\n';
  }
}

std::vector<ContinuousAnnotation> read_continuous_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, {"clip_source_id", "annotator_id", "dimension", "time_s", "value"});
  const std::size_t si = column(t, "clip_source_id"), ai = column(t, "annotator_id"), di = column(t, "dimension"),
                    ti = column(t, "time_s"), vi = column(t, "value");
  std::vector<ContinuousAnnotation> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.push_back({row[si], row[ai], parse_trait(row[di]), parse_double(row[ti], path, t.line_numbers[r]),
                   parse_double(row[vi], path, t.line_numbers[r])});
  }
  return out;
}

void write_labels_csv(const std::filesystem::path& path, std::span<const LabelRow> rows) {
  auto out = open_out(path);
  out << "clip_id,trait,label\n";
  for (const LabelRow& r : rows) out << quote(r.clip_id) << ',' << trait_name(r.trait) << ',' << r.label << '\n';
}

std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, {"clip_id", "trait", "label"});
  const std::size_t ci = column(t, "clip_id"), ti = column(t, "trait"), li = column(t, "label");
  std::vector<LabelRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[li] != "0" && row[li] != "1") {
      fail(ErrorCode::kLabelError, fmt::format("{}:{}: label must be 0 or 1", path.string(), t.line_numbers[r]));
    }
    out.push_back({row[ci], parse_trait(row[ti]), row[li] == "1" ? 1 : 0});
  }
  return out;
}

std::vector<AnnotatedClip> join_labels(std::span<const ManifestRow> manifest, std::span<const LabelRow> labels) {
  std::vector<AnnotatedClip> clips;
  std::unordered_map<std::string, std::size_t> index;
  for (const ManifestRow& m : manifest) {
    if (!index.emplace(m.clip_id, clips.size()).second) {
      fail(ErrorCode::kFormatError, "manifest lists clip " + m.clip_id + " twice");
    }
    clips.push_back({m.clip_id, m.speaker_id, m.path, {}});
  }
  for (const LabelRow& l : labels) {
    auto it = index.find(l.clip_id);
    if (it != index.end()) clips[it->second].labels[l.trait] = l.label;
  }
  return clips;
}

}  // namespace afx::corpus
