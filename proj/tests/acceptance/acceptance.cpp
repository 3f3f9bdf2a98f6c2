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

// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria. argv[1], when given, is the afx CLI used for the
// end-to-end file-based run.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "afx/corpus/csv.hpp"
#include "afx/corpus/synthetic.hpp"
#include "afx/dsp/masking.hpp"
#include "afx/dsp/spectrogram.hpp"
#include "afx/error.hpp"
#include "afx/experiment/protocol.hpp"
#include "afx/metrics/metrics.hpp"
#include "afx/tensor/container.hpp"
#include "grad_suite.hpp"

using namespace afx;
using namespace afx::experiment;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  fmt::print("{} [{}] {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, secs);
  std::fflush(stdout);
}

double seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

// --- independent oracles -------------------------------------------------

double oracle_uar(const std::vector<int>& truth, const std::vector<int>& pred) {
  double recall_sum = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    int hit = 0, total = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != cls) continue;
      ++total;
      if (pred[i] == cls) ++hit;
    }
    recall_sum += static_cast<double>(hit) / total;
  }
  return recall_sum / 2.0;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double oracle_phi(const std::vector<int>& x, const std::vector<int>& y) {
  double n[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < x.size(); ++i) n[x[i]][y[i]] += 1;
  const double r1 = n[1][0] + n[1][1], r0 = n[0][0] + n[0][1];
  const double c1 = n[0][1] + n[1][1], c0 = n[0][0] + n[1][0];
  return (n[1][1] * n[0][0] - n[1][0] * n[0][1]) / std::sqrt(r1 * r0 * c1 * c0);
}

// Integer five-point scores: judge j's mean is sum_j / clips, so
// score > mean  <=>  score * clips > sum_j, exactly.
std::vector<int> oracle_binarize(const corpus::JudgeScores& s, std::size_t majority) {
  std::vector<int> out(s.num_clips(), 0);
  std::vector<long> sums(s.num_judges(), 0);
  for (std::size_t j = 0; j < s.num_judges(); ++j)
    for (std::size_t c = 0; c < s.num_clips(); ++c) sums[j] += std::lround(s.at(j, c));
  for (std::size_t c = 0; c < s.num_clips(); ++c) {
    std::size_t above = 0;
    for (std::size_t j = 0; j < s.num_judges(); ++j) {
      if (std::lround(s.at(j, c)) * static_cast<long>(s.num_clips()) > sums[j]) ++above;
    }
    out[c] = above >= majority ? 1 : 0;
  }
  return out;
}

corpus::JudgeScores random_five_point(std::mt19937_64& rng, std::size_t judges, std::size_t clips) {
  corpus::JudgeScores s = corpus::make_scores(corpus::Trait::kEX, judges, clips);
  std::uniform_int_distribution<int> score(1, 5);
  for (double& v : s.values) v = score(rng);
  return s;
}

// --- shared synthetic setups ---------------------------------------------

Dataset personality_corpus(std::size_t clips, double clip_seconds, std::uint64_t seed) {
  corpus::SyntheticSpec spec;
  spec.num_clips = clips;
  spec.clip_seconds = clip_seconds;
  spec.seed = seed;
  return dataset_from_synthetic(corpus::generate_synthetic_corpus(spec));
}

Dataset emotion_corpus(std::size_t recordings, std::size_t per_recording, std::uint64_t seed) {
  corpus::SyntheticEmotionSpec spec;
  spec.num_recordings = recordings;
  spec.clips_per_recording = per_recording;
  spec.seed = seed;
  return dataset_from_synthetic(corpus::generate_synthetic_emotion(spec), spec.clip_seconds);
}

bool same_uars(const RunRecord& a, const RunRecord& b) {
  if (a.folds.size() != b.folds.size()) return false;
  for (std::size_t i = 0; i < a.folds.size(); ++i) {
    if (a.folds[i].uar != b.folds[i].uar || !(a.folds[i].confusion == b.folds[i].confusion)) return false;
  }
  return true;
}

// Transfer setup shared by the end-to-end, freeze and determinism checks.
struct TransferFixture {
  ExperimentConfig config;
  Dataset personality;
  Checkpoint checkpoint;
  double pretrain_seconds = 0.0;
};

TransferFixture make_transfer_fixture() {
  TransferFixture f;
  f.config.seed = 1;
  f.config.pretrain_epoch_grid = {20};
  f.personality = personality_corpus(64, 0.128, 11);
  const auto start = Clock::now();
  f.checkpoint = run_pretrain(f.config, emotion_corpus(4, 16, 12)).checkpoints.back();
  f.pretrain_seconds = seconds(start);
  return f;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

int main(int argc, char** argv) {
  const auto total_start = Clock::now();

  criterion(1, "gradient suite", [] {
    const auto start = Clock::now();
    const auto ops_report = testing::op_gradient_suite(20);
    const auto model_report = testing::tiny_model_gradient_suite(20);
    const double secs = seconds(start);
    const bool pass = ops_report.overall() < 1e-4 && model_report.worst_rel < 1e-4 &&
                      model_report.key_bias_analytic < 1e-12 && model_report.key_bias_numeric < 1e-9 && secs < 120;
    return Outcome{pass, fmt::format("{} ops x 20, worst {:.2e}; tiny model (d_model=8) x 20, worst {:.2e}; "
                                     "zero key-bias grads |a|={:.1e} |n|={:.1e}; {:.0f} s < 120 s",
                                     ops_report.worst.size(), ops_report.overall(), model_report.worst_rel,
                                     model_report.key_bias_analytic, model_report.key_bias_numeric, secs)};
  });

  criterion(2, "metric oracles", [] {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 10 + rng() % 90;
      std::vector<int> t(n), p(n), x(n), y(n);
      std::vector<double> a(n), b(n);
      std::normal_distribution<double> g;
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<int>(rng() % 2);
        p[i] = static_cast<int>(rng() % 2);
        x[i] = static_cast<int>(rng() % 2);
        y[i] = static_cast<int>(rng() % 2);
        a[i] = g(rng);
        b[i] = 0.5 * a[i] + g(rng);
      }
      t[0] = 0, t[1] = 1, x[0] = 0, x[1] = 1, y[0] = 0, y[1] = 1;
      worst = std::max(worst, std::abs(metrics::uar(metrics::ConfusionMatrix::from_predictions(t, p)) -
                                       oracle_uar(t, p)));
      worst = std::max(worst, std::abs(metrics::phi(x, y) - oracle_phi(x, y)));
      worst = std::max(worst, std::abs(metrics::pearson(a, b) - oracle_pearson(a, b)));
    }
    metrics::ConfusionMatrix hand;
    hand.counts[0][0] = 8, hand.counts[0][1] = 2, hand.counts[1][0] = 3, hand.counts[1][1] = 7;
    const double hand_uar = metrics::uar(hand);
    const int labels[] = {0, 1};
    const double uniform = ops::softmax_cross_entropy(Tensor({2, 2}, {0.3, 0.3, -1.2, -1.2}), labels).item();
    const bool pass = worst <= 1e-12 && hand_uar == 0.75 && std::abs(uniform - std::numbers::ln2) <= 1e-9;
    return Outcome{pass, fmt::format("200 instances each, worst |diff| {:.1e} <= 1e-12; [[8,2],[3,7]] -> {}; "
                                     "uniform logits -> {:.12f} (ln 2 = {:.12f})",
                                     worst, hand_uar, uniform, std::numbers::ln2)};
  });

  criterion(3, "labeling oracle", [] {
    std::mt19937_64 rng(3);
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = random_five_point(rng, 11, 50);
      if (corpus::binarize_majority(s, 6) == oracle_binarize(s, 6)) ++agree;
    }
    corpus::JudgeScores flat = corpus::make_scores(corpus::Trait::kEX, 11, 50);
    std::fill(flat.values.begin(), flat.values.end(), 3.0);
    const auto flat_labels = corpus::binarize_majority(flat, 6);
    const bool all_zero = std::all_of(flat_labels.begin(), flat_labels.end(), [](int v) { return v == 0; });
    int shift_ok = 0;
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto s = random_five_point(rng, 11, 50);
      auto moved = s;
      const std::size_t judge = rng() % 11;
      const double d = shift(rng);
      for (std::size_t c = 0; c < 50; ++c) moved.values[judge * 50 + c] += d;
      if (corpus::binarize_majority(s, 6) == corpus::binarize_majority(moved, 6)) ++shift_ok;
    }
    return Outcome{agree == 100 && all_zero && shift_ok == 50,
                   fmt::format("brute force {}/100; all-equal corpus all zero: {}; row shift invariant {}/50", agree,
                               all_zero ? "yes" : "no", shift_ok)};
  });

  criterion(4, "protocol shape", [] {
    ExperimentConfig config;
    config.seed = 4;
    const auto pre = run_pretrain(config, emotion_corpus(2, 2, 41));
    std::vector<std::size_t> epochs;
    bool ascending = true;
    for (std::size_t i = 0; i < pre.checkpoints.size(); ++i) {
      epochs.push_back(pre.checkpoints[i].epochs);
      if (i > 0 && pre.checkpoints[i].optimizer.step_count <= pre.checkpoints[i - 1].optimizer.step_count) {
        ascending = false;
      }
    }
    const Dataset p = personality_corpus(20, 0.128, 42);
    const RunRecord transfer = run_transfer(config, pre.checkpoints.front(), p);
    std::set<std::pair<corpus::Trait, std::size_t>> cells;
    for (const auto& f : transfer.folds) cells.emplace(f.trait, f.fold);
    const auto table = correlate(p);
    const bool pass = epochs == config.pretrain_epoch_grid && ascending && transfer.folds.size() == 25 &&
                      cells.size() == 25 && table.size() == 10;
    return Outcome{pass, fmt::format("{} checkpoints at epochs {} (steps ascending: {}); transfer {} entries over "
                                     "{} (trait, fold) cells; correlate {} pairs",
                                     pre.checkpoints.size(), fmt::join(epochs, ","), ascending ? "yes" : "no",
                                     transfer.folds.size(), cells.size(), table.size())};
  });

  std::optional<TransferFixture> fixture;
  std::optional<RunRecord> transfer_record;
  criterion(5, "transfer end-to-end on synthetic data", [&] {
    const auto start = Clock::now();
    fixture = make_transfer_fixture();
    transfer_record = run_transfer(fixture->config, fixture->checkpoint, fixture->personality);
    const double uar = transfer_record->overall_mean_uar();
    std::vector<double> shuffled;
    for (std::uint64_t s = 0; s < 5; ++s) {
      shuffled.push_back(
          run_transfer(fixture->config, fixture->checkpoint, with_shuffled_labels(fixture->personality, 100 + s))
              .overall_mean_uar());
    }
    const double null_mean = std::accumulate(shuffled.begin(), shuffled.end(), 0.0) / 5.0;
    const double secs = seconds(start);
    const bool pass = uar >= 0.9 && null_mean >= 0.4 && null_mean <= 0.6 && secs < 600;
    return Outcome{pass, fmt::format("64 amplitude clips, 20 pretrain epochs ({:.0f} s): mean UAR {:.3f} >= 0.9; "
                                     "shuffled labels {:.3f} in [0.4, 0.6] (seeds: {:.3f}); {:.0f} s < 600 s",
                                     fixture->pretrain_seconds, uar, null_mean, fmt::join(shuffled, " "), secs)};
  });

  criterion(6, "freeze invariance", [&] {
    if (!transfer_record) return Outcome{false, "transfer run unavailable"};
    auto net = instantiate(fixture->checkpoint, fixture->config.model);
    const std::string stored = parameter_digest(net.params(), [](const Parameter& p) {
      return !model::is_head_parameter(p);
    });
    const std::string& before = transfer_record->info.at("backbone_digest_before");
    const std::string& after = transfer_record->info.at("backbone_digest_after");
    const bool pass = before == after && after == stored && fixture->config.finetune_epochs == 100;
    return Outcome{pass, fmt::format("backbone sha256 {}... before, {}... after 25 x {} fine-tune epochs, "
                                     "checkpoint {}...",
                                     before.substr(0, 12), after.substr(0, 12), fixture->config.finetune_epochs,
                                     stored.substr(0, 12))};
  });

  criterion(7, "augmentation accounting", [] {
    ExperimentConfig config;
    config.seed = 7;
    config.finetune_epochs = 1;
    const Dataset p = personality_corpus(20, 0.5, 71);
    const AugmentRun run = run_augment_baseline(config, p);
    bool fourfold = true;
    for (const auto& f : run.record.folds) fourfold = fourfold && f.train_size == 4 * (p.size() - f.test_size);
    std::size_t augmented_in_test = 0, train_rows = 0;
    for (const auto& row : run.audit) {
      if (row.role == "test" && row.tag != dsp::kOriginalTag) ++augmented_in_test;
      if (row.role == "train") ++train_rows;
    }
    audit_leakage(run.audit);

    const auto spec = dsp::log_mel(p.waveforms[0]);
    bool identity = true;
    for (dsp::MaskKind kind : {dsp::MaskKind::kFrequency, dsp::MaskKind::kTime, dsp::MaskKind::kFreqThenTime,
                               dsp::MaskKind::kTimeThenFreq}) {
      const auto masked = dsp::apply_mask(spec, {kind, 0, 0, 1, 99});
      identity = identity && masked.values.size() == spec.values.size() &&
                 std::memcmp(masked.values.data(), spec.values.data(), spec.values.size() * sizeof(double)) == 0;
    }
    const bool pass = fourfold && run.record.folds.size() == 25 && augmented_in_test == 0 && identity;
    return Outcome{pass, fmt::format("default plan -> 4x training folds: {} ({} train rows over 25 folds); "
                                     "augmented items in test folds: {}; F=0/T=0 byte identity: {}",
                                     fourfold ? "yes" : "no", train_rows, augmented_in_test,
                                     identity ? "yes" : "no")};
  });

  criterion(8, "embedding-head discrimination", [] {
    ExperimentConfig config;
    config.seed = 8;
    const Dataset p = personality_corpus(64, 0.128, 81);
    std::vector<std::string> ids;
    for (const auto& c : p.clips) ids.push_back(c.clip_id);
    model::PlantedStackSpec spec;
    spec.seed = 82;
    // Every synthetic trait copies the latent label, so one planted stack
    // serves all five.
    std::vector<int> latent = p.labels(corpus::Trait::kEX);
    std::map<std::string, model::EmbeddingStack> stacks;
    for (auto& s : model::planted_layer_stacks(ids, latent, spec)) stacks.emplace(s.clip_id, std::move(s));
    const double mid = run_embed_head(config, p, stacks, model::LayerMode::kMiddle).overall_mean_uar();
    const double avg = run_embed_head(config, p, stacks, model::LayerMode::kAverage).overall_mean_uar();
    return Outcome{mid - avg >= 0.10, fmt::format("L={} signal in layer {}: Middle {:.3f}, Average {:.3f}, "
                                                  "margin {:.1f} points >= 10",
                                                  spec.layers, model::middle_layer(spec.layers), mid, avg,
                                                  100.0 * (mid - avg))};
  });

  criterion(9, "determinism", [&] {
    std::vector<std::string> checked;
    bool pass = true;
    if (transfer_record) {
      pass = pass && same_uars(*transfer_record, run_transfer(fixture->config, fixture->checkpoint,
                                                                fixture->personality));
      checked.push_back("transfer");
    }
    ExperimentConfig config;
    config.seed = 9;
    config.pretrain_epoch_grid = {1, 2};
    config.finetune_epochs = 3;
    const Dataset e = emotion_corpus(2, 4, 91);
    const auto a = run_pretrain(config, e), b = run_pretrain(config, e);
    pass = pass && a.checkpoints.back().parameters == b.checkpoints.back().parameters && a.epoch_losses == b.epoch_losses;
    checked.push_back("pretrain");
    const Dataset p = personality_corpus(20, 0.5, 92);
    pass = pass && same_uars(run_multitask(config, p, corpus::Trait::kEX, corpus::Trait::kAG, &a.checkpoints.back()),
                             run_multitask(config, p, corpus::Trait::kEX, corpus::Trait::kAG, &a.checkpoints.back()));
    checked.push_back("multitask");
    config.traits = {corpus::Trait::kEX};
    pass = pass && same_uars(run_augment_baseline(config, p).record, run_augment_baseline(config, p).record);
    checked.push_back("augment-baseline");
    std::vector<std::string> ids;
    for (const auto& c : p.clips) ids.push_back(c.clip_id);
    std::map<std::string, model::EmbeddingStack> stacks;
    for (auto& s : model::planted_layer_stacks(ids, p.labels(corpus::Trait::kEX), {})) stacks.emplace(s.clip_id, s);
    pass = pass && same_uars(run_embed_head(config, p, stacks, model::LayerMode::kMiddle),
                             run_embed_head(config, p, stacks, model::LayerMode::kMiddle));
    checked.push_back("embed-head");
    return Outcome{pass, fmt::format("identical UARs on repeat with the same seed: {}", fmt::join(checked, ", "))};
  });

  criterion(10, "file-based end-to-end run (conditional)", [&] {
    if (argc < 2) return Outcome{false, "no CLI path given"};
    const fs::path cli = argv[1];
    const fs::path dir = fs::temp_directory_path() / "afx_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> steps{
        "synth personality --out {d}/spc_src --clips 24 --seed 1",
        "synth emotion --out {d}/recola_src --recordings 2 --clips-per-recording 8 --seed 2",
        "prepare personality --manifest {d}/spc_src/manifest.csv --scores {d}/spc_src/scores.csv --out {d}/spc",
        "prepare emotion --recordings {d}/recola_src/recordings.csv --annotations {d}/recola_src/annotations.csv "
        "--clip-seconds 0.128 --out {d}/recola",
        "pretrain --corpus {d}/recola --out {d}/ckpt --epoch-grid 2,4 --seed 1",
        "transfer --corpus {d}/spc --checkpoint {d}/ckpt/pretrain_Arousal_ep002.aftx --finetune-epochs 10 "
        "--out {d}/runs/run_transfer_ep002.json --seed 1",
        "transfer --corpus {d}/spc --checkpoint {d}/ckpt/pretrain_Arousal_ep004.aftx --finetune-epochs 10 "
        "--out {d}/runs/run_transfer_ep004.json --seed 1",
        "correlate --corpus {d}/spc --out {d}/report/correlation.csv",
        "report --runs {d}/runs --out {d}/report",
    };
    for (const std::string& step : steps) {
      const std::string cmd =
          fmt::format("\"{}\" {} > {}/log.txt 2>&1", cli.string(), fmt::format(fmt::runtime(step), fmt::arg("d", dir.string())),
                      dir.string());
      if (std::system(cmd.c_str()) != 0) {
        return Outcome{false, "step failed: " + step.substr(0, step.find(' ')) + "; " + slurp(dir / "log.txt")};
      }
    }
    const std::string uar = slurp(dir / "report/uar_table.csv");
    const std::string corr = slurp(dir / "report/correlation.csv");
    const bool pass = uar.rfind("method,EX,AG,CO,NE,OP,avg\n", 0) == 0 && count_lines(uar) == 3 &&
                      corr.rfind("pair,phi_2scale,pearson_5scale\n", 0) == 0 && count_lines(corr) == 11 &&
                      fs::exists(dir / "report/pretrain_curve.csv");
    return Outcome{pass, fmt::format("synth -> prepare -> pretrain -> transfer x2 -> correlate -> report; "
                                     "uar_table.csv {} rows, correlation.csv {} rows",
                                     count_lines(uar) - 1, count_lines(corr) - 1)};
  });

  fmt::print("{} of 10 criteria failed; total {:.0f} s\n", failures, seconds(total_start));
  return failures;
}
