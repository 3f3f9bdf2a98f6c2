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

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afx/corpus/csv.hpp"
#include "afx/corpus/synthetic.hpp"
#include "afx/dsp/masking.hpp"
#include "afx/dsp/spectrogram.hpp"
#include "afx/error.hpp"
#include "afx/experiment/protocol.hpp"
#include "afx/model/embedding.hpp"

using namespace afx;
using namespace afx::experiment;
namespace fs = std::filesystem;

namespace {

// Experiment fields settable from the command line or the --config file.
// Only options actually given override the built-in defaults.
struct Overrides {
  std::uint64_t seed = 0;
  std::string pretrain_label;
  std::vector<std::size_t> epoch_grid;
  std::size_t finetune_epochs = 0, folds = 0, batch_size = 0;
  double lr = 0, finetune_lr = 0, weight_decay = 0, baseline_dropout = 0;
  bool speaker_disjoint = false;
  std::vector<std::string> traits;
  std::size_t d_model = 0, num_heads = 0, encoder_layers = 0, ffn_hidden = 0, conv_layers = 0, conv_window = 0,
              conv_stride = 0, head_hidden = 0;
  std::vector<std::string> mask_kinds;
  std::size_t mask_freq_width = 0, mask_time_width = 0, masks_per_axis = 0;
  std::string embedding_label;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App& app) {
    auto add = [&](const std::string& name, auto& target, const std::string& help) {
      return opts[name] = app.add_option("--" + name, target, help);
    };
    add("seed", seed, "Seed for every random choice (required for training commands)");
    add("pretrain-label", pretrain_label, "Emotion dimension used for pretraining: Arousal or Valence");
    add("epoch-grid", epoch_grid, "Pretraining epochs at which checkpoints are taken")->delimiter(',');
    add("finetune-epochs", finetune_epochs, "Epochs per fold for heads and from-scratch baselines");
    add("folds", folds, "Cross-validation folds");
    add("lr", lr, "Learning rate for pretraining and from-scratch training");
    add("finetune-lr", finetune_lr, "Learning rate for heads trained on frozen features");
    add("weight-decay", weight_decay, "AdamW decoupled weight decay");
    add("batch-size", batch_size, "Minibatch size");
    opts["speaker-disjoint"] = app.add_flag("--speaker-disjoint", speaker_disjoint, "Keep each speaker in one fold");
    add("traits", traits, "Traits evaluated, e.g. EX,AG,CO,NE,OP")->delimiter(',');
    add("d-model", d_model, "Model width");
    add("num-heads", num_heads, "Attention heads");
    add("encoder-layers", encoder_layers, "Transformer encoder layers");
    add("ffn-hidden", ffn_hidden, "Feed-forward hidden width");
    add("conv-layers", conv_layers, "Conv1D layers in front of the encoder");
    add("conv-window", conv_window, "Conv1D window");
    add("conv-stride", conv_stride, "Conv1D stride");
    add("head-hidden", head_hidden, "Classifier head hidden width");
    add("mask-kinds", mask_kinds, "Augmentation kinds: freq, time, freq_time, time_freq")->delimiter(',');
    add("mask-freq-width", mask_freq_width, "Largest frequency mask F, in mel bins");
    add("mask-time-width", mask_time_width, "Largest time mask T, in frames");
    add("masks-per-axis", masks_per_axis, "Masks drawn per axis");
    add("baseline-dropout", baseline_dropout, "Dropout in the augmentation baseline");
    add("embedding-label", embedding_label, "Report label for embedding-head rows");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  ExperimentConfig build(const std::string& task) const {
    ExperimentConfig c;
    c.task = task;
    if (given("seed")) c.seed = seed;
    if (given("pretrain-label")) c.pretrain_label = corpus::parse_trait(pretrain_label);
    if (given("epoch-grid")) c.pretrain_epoch_grid = epoch_grid;
    if (given("finetune-epochs")) c.finetune_epochs = finetune_epochs;
    if (given("folds")) c.folds = folds;
    if (given("lr")) c.lr = lr;
    if (given("finetune-lr")) c.finetune_lr = finetune_lr;
    if (given("weight-decay")) c.weight_decay = weight_decay;
    if (given("batch-size")) c.batch_size = batch_size;
    if (given("speaker-disjoint")) c.speaker_disjoint = speaker_disjoint;
    if (given("traits")) {
      c.traits.clear();
      for (const auto& t : traits) c.traits.push_back(corpus::parse_trait(t));
    }
    if (given("d-model")) c.model.d_model = d_model;
    if (given("num-heads")) c.model.num_heads = num_heads;
    if (given("encoder-layers")) c.model.num_encoder_layers = encoder_layers;
    if (given("ffn-hidden")) c.model.ffn_hidden = ffn_hidden;
    if (given("conv-layers")) c.model.conv_layers = conv_layers;
    if (given("conv-window")) c.model.conv_window = conv_window;
    if (given("conv-stride")) c.model.conv_stride = conv_stride;
    if (given("head-hidden")) c.model.head_hidden = head_hidden;
    if (given("mask-kinds")) {
      c.mask_kinds.clear();
      for (const auto& k : mask_kinds) c.mask_kinds.push_back(dsp::parse_mask_kind(k));
    }
    if (given("mask-freq-width")) c.mask_freq_width = mask_freq_width;
    if (given("mask-time-width")) c.mask_time_width = mask_time_width;
    if (given("masks-per-axis")) c.masks_per_axis = masks_per_axis;
    if (given("baseline-dropout")) c.baseline_dropout = baseline_dropout;
    if (given("embedding-label")) c.embedding_label = embedding_label;
    c.validate();
    return c;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

std::string losses_csv(const std::vector<double>& losses, std::size_t first_epoch) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out += fmt::format("{},{}\n", first_epoch + i, losses[i]);
  return out;
}

std::map<std::string, model::EmbeddingStack> read_stacks(const fs::path& dir, const Dataset& data) {
  std::map<std::string, model::EmbeddingStack> stacks;
  for (const auto& clip : data.clips) {
    const fs::path p = dir / (clip.clip_id + ".aftx");
    if (fs::exists(p)) stacks.emplace(clip.clip_id, model::read_embedding_stack(p));
  }
  return stacks;
}

void print_summary(const RunRecord& r) {
  for (const char* task : {"A", "B"}) {
    const auto means = r.mean_uar(task);
    if (means.empty()) continue;
    std::string cells;
    for (const auto& [trait, uar] : means) cells += fmt::format(" {}={:.2f}", corpus::trait_name(trait), 100 * uar);
    fmt::print("{}{}:{} mean={:.2f} ({:.1f} s)\n", r.method, r.kind == "multitask" ? fmt::format(" [task {}]", task) : "",
               cells, 100 * r.overall_mean_uar(task), r.wall_time_s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afx: speech-affect transfer learning workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI or TOML file with option values; command-line flags take precedence");
  Overrides ov;
  ov.attach(app);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic source corpus (personality or emotion schema)");
  std::string synth_kind = "personality", synth_signal = "amplitude";
  fs::path synth_out;
  std::size_t synth_clips = 64, synth_judges = 11, synth_recordings = 4, synth_per_rec = 16, synth_annotators = 6;
  double synth_seconds = 0.128, synth_noise = 0.3, synth_agreement = 1.0;
  synth->add_option("kind", synth_kind, "personality or emotion")->check(CLI::IsMember({"personality", "emotion"}));
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--clips", synth_clips, "Personality clips");
  synth->add_option("--judges", synth_judges, "Personality judges");
  synth->add_option("--recordings", synth_recordings, "Emotion recordings");
  synth->add_option("--clips-per-recording", synth_per_rec, "Clips per emotion recording");
  synth->add_option("--annotators", synth_annotators, "Emotion annotators");
  synth->add_option("--clip-seconds", synth_seconds, "Clip length in seconds");
  synth->add_option("--signal", synth_signal, "amplitude, pitch or none");
  synth->add_option("--noise", synth_noise, "Judge or annotator noise");
  synth->add_option("--agreement", synth_agreement, "Chance a trait label copies the latent label");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Source manifests and scores -> prepared corpus with labels");
  std::string prep_kind = "personality";
  fs::path prep_manifest, prep_scores, prep_recordings, prep_annotations, prep_out;
  double prep_seconds = 10.0;
  prepare->add_option("kind", prep_kind, "personality or emotion")->check(CLI::IsMember({"personality", "emotion"}));
  prepare->add_option("--manifest", prep_manifest, "Personality manifest.csv");
  prepare->add_option("--scores", prep_scores, "Personality scores.csv");
  prepare->add_option("--recordings", prep_recordings, "Emotion recordings manifest");
  prepare->add_option("--annotations", prep_annotations, "Emotion continuous annotations");
  prepare->add_option("--clip-seconds", prep_seconds, "Emotion segment length");
  prepare->add_option("--out", prep_out, "Prepared corpus directory")->required();

  // augment
  auto* augment = app.add_subcommand("augment", "Write log-mel spectrograms plus masked copies of every clip");
  fs::path aug_corpus, aug_out;
  augment->add_option("--corpus", aug_corpus, "Prepared corpus")->required();
  augment->add_option("--out", aug_out, "Output directory")->required();

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "Train the full model on the emotion corpus over the epoch grid");
  fs::path pre_corpus, pre_out, pre_resume;
  pretrain->add_option("--corpus", pre_corpus, "Prepared emotion corpus")->required();
  pretrain->add_option("--out", pre_out, "Checkpoint directory")->required();
  pretrain->add_option("--resume", pre_resume, "Continue from this checkpoint");

  // transfer
  auto* transfer = app.add_subcommand("transfer", "Freeze a checkpoint and fine-tune per-trait heads");
  fs::path tr_corpus, tr_out, tr_runs;
  std::vector<fs::path> tr_checkpoints;
  bool tr_no_cache = false;
  std::uint64_t tr_shuffle = 0;
  transfer->add_option("--corpus", tr_corpus, "Prepared personality corpus")->required();
  transfer->add_option("--checkpoint", tr_checkpoints, "Checkpoint file(s)")->required();
  auto* tr_out_opt = transfer->add_option("--out", tr_out, "Run record (single checkpoint)");
  auto* tr_runs_opt = transfer->add_option("--runs", tr_runs, "Directory for one run record per checkpoint");
  tr_out_opt->excludes(tr_runs_opt);
  transfer->add_flag("--no-cache", tr_no_cache, "Recompute backbone features in every step");
  auto* tr_shuffle_opt = transfer->add_option("--shuffle-labels", tr_shuffle, "Permute labels with this seed (control)");

  // embed-head
  auto* embed = app.add_subcommand("embed-head", "Classifier head on exported embedding stacks");
  fs::path emb_corpus, emb_stacks, emb_out;
  std::string emb_mode = "mid";
  embed->add_option("--corpus", emb_corpus, "Prepared personality corpus")->required();
  embed->add_option("--stacks", emb_stacks, "Directory of <clip_id>.aftx stacks")->required();
  embed->add_option("--mode", emb_mode, "mid or avg")->check(CLI::IsMember({"mid", "avg"}));
  embed->add_option("--out", emb_out, "Run record")->required();

  // stub-embed
  auto* stub = app.add_subcommand("stub-embed", "Write hermetic stand-in embedding stacks for a corpus");
  fs::path stub_corpus, stub_out;
  std::string stub_kind = "random", stub_trait = "EX";
  std::size_t stub_layers = 12, stub_dim = 16;
  stub->add_option("--corpus", stub_corpus, "Prepared corpus")->required();
  stub->add_option("--out", stub_out, "Stack directory")->required();
  stub->add_option("--kind", stub_kind, "random or planted")->check(CLI::IsMember({"random", "planted"}));
  stub->add_option("--trait", stub_trait, "Label planted in the middle layer");
  stub->add_option("--layers", stub_layers, "Layers per stack");
  stub->add_option("--dim", stub_dim, "Embedding width");

  // augment-baseline
  auto* baseline = app.add_subcommand("augment-baseline", "Spectrogram CNN from scratch on augmented training folds");
  fs::path base_corpus, base_out, base_audit;
  baseline->add_option("--corpus", base_corpus, "Prepared personality corpus")->required();
  baseline->add_option("--out", base_out, "Run record")->required();
  baseline->add_option("--audit", base_audit, "Training/test manifest audit CSV");

  // multitask
  auto* multitask = app.add_subcommand("multitask", "Two heads over one trunk, reported per task");
  fs::path mt_corpus, mt_checkpoint, mt_out;
  std::string mt_a = "Arousal", mt_b = "Valence";
  bool mt_train_backbone = false;
  multitask->add_option("--corpus", mt_corpus, "Prepared corpus")->required();
  multitask->add_option("--task-a", mt_a, "First trait (folds are stratified on it)");
  multitask->add_option("--task-b", mt_b, "Second trait");
  multitask->add_option("--checkpoint", mt_checkpoint, "Frozen backbone");
  multitask->add_flag("--train-backbone", mt_train_backbone, "Train the trunk jointly");
  multitask->add_option("--out", mt_out, "Run record")->required();

  // correlate
  auto* corr = app.add_subcommand("correlate", "Trait-pair phi and Pearson table");
  fs::path corr_corpus, corr_out, corr_json;
  corr->add_option("--corpus", corr_corpus, "Prepared personality corpus with scores.csv")->required();
  corr->add_option("--out", corr_out, "CSV output")->required();
  corr->add_option("--json", corr_json, "Optional JSON output");

  // report
  auto* report = app.add_subcommand("report", "UAR table and pretraining curve from stored run records");
  fs::path rep_runs, rep_out;
  report->add_option("--runs", rep_runs, "Directory of run records")->required();
  report->add_option("--out", rep_out, "Report directory")->required();

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const ExperimentConfig c = ov.build("synth");
      const std::uint64_t seed = c.require_seed();
      if (synth_kind == "personality") {
        corpus::SyntheticSpec spec;
        spec.num_clips = synth_clips;
        spec.num_judges = synth_judges;
        spec.clip_seconds = synth_seconds;
        spec.signal = corpus::parse_label_signal(synth_signal);
        spec.judge_noise = synth_noise;
        spec.trait_agreement = synth_agreement;
        spec.seed = seed;
        write_personality_sources(synth_out, corpus::generate_synthetic_corpus(spec));
      } else {
        corpus::SyntheticEmotionSpec spec;
        spec.num_recordings = synth_recordings;
        spec.clips_per_recording = synth_per_rec;
        spec.num_annotators = synth_annotators;
        spec.clip_seconds = synth_seconds;
        spec.signal = corpus::parse_label_signal(synth_signal);
        spec.annotator_noise = synth_noise;
        spec.trait_agreement = synth_agreement;
        spec.seed = seed;
        write_emotion_sources(synth_out, corpus::generate_synthetic_emotion(spec));
      }
      fmt::print("wrote {} sources to {}\n", synth_kind, synth_out.string());
    } else if (*prepare) {
      if (prep_kind == "personality") {
        if (prep_manifest.empty() || prep_scores.empty()) {
          fail(ErrorCode::kInvalidArgument, "prepare personality needs --manifest and --scores");
        }
        prepare_personality(prep_manifest, prep_scores, prep_out);
      } else {
        if (prep_recordings.empty() || prep_annotations.empty()) {
          fail(ErrorCode::kInvalidArgument, "prepare emotion needs --recordings and --annotations");
        }
        prepare_emotion(prep_recordings, prep_annotations, prep_out, prep_seconds);
      }
      fmt::print("prepared {} corpus in {}\n", prep_kind, prep_out.string());
    } else if (*augment) {
      const ExperimentConfig c = ov.build("augment");
      const std::uint64_t seed = c.require_seed();
      const Dataset data = load_prepared_corpus(aug_corpus);
      std::vector<dsp::Spectrogram> specs;
      for (const auto& w : data.waveforms) specs.push_back(dsp::log_mel(w));
      const auto items = dsp::augment_corpus(specs, augment_plan(c, seed));
      fs::create_directories(aug_out);
      std::string manifest = "clip_id,tag,seed,path\n";
      for (const auto& item : items) {
        const std::string& id = data.clips[item.source_index].clip_id;
        const std::string name = id + "_" + item.tag + ".aftx";
        dsp::write_spectrogram(aug_out / name, item.spectrogram, {id, item.tag, item.seed});
        manifest += fmt::format("{},{},{},{}\n", id, item.tag, item.seed, name);
      }
      write_file(aug_out / "augmented.csv", manifest);
      fmt::print("wrote {} spectrograms for {} clips\n", items.size(), data.size());
    } else if (*pretrain) {
      const ExperimentConfig c = ov.build("pretrain");
      const Dataset data = load_prepared_corpus(pre_corpus);
      std::optional<Checkpoint> resume;
      if (!pre_resume.empty()) resume = load_checkpoint(pre_resume);
      const auto result = run_pretrain(c, data, resume ? &*resume : nullptr);
      for (const auto& ck : result.checkpoints) {
        save_checkpoint(pre_out / checkpoint_file_name(ck), ck);
        fmt::print("{}\n", (pre_out / checkpoint_file_name(ck)).string());
      }
      write_file(pre_out / fmt::format("pretrain_{}_losses.csv", corpus::trait_name(c.pretrain_label)),
                 losses_csv(result.epoch_losses, resume ? resume->epochs + 1 : 1));
    } else if (*transfer) {
      const ExperimentConfig c = ov.build("transfer");
      Dataset data = load_prepared_corpus(tr_corpus);
      if (tr_shuffle_opt->count()) data = with_shuffled_labels(data, tr_shuffle);
      if (tr_checkpoints.size() > 1 && tr_out_opt->count()) {
        fail(ErrorCode::kInvalidArgument, "use --runs with more than one checkpoint");
      }
      if (!tr_out_opt->count() && !tr_runs_opt->count()) fail(ErrorCode::kInvalidArgument, "give --out or --runs");
      for (const fs::path& p : tr_checkpoints) {
        const Checkpoint ck = load_checkpoint(p);
        RunRecord r = run_transfer(c, ck, data, {!tr_no_cache});
        if (tr_shuffle_opt->count()) {
          r.method += " [shuffled labels]";
          r.info["shuffle_seed"] = std::to_string(tr_shuffle);
        }
        const fs::path out = tr_out_opt->count()
                                 ? tr_out
                                 : tr_runs / fmt::format("run_transfer_{}_ep{:03d}.json",
                                                         corpus::trait_name(ck.label), ck.epochs);
        write_run_record(out, r);
        print_summary(r);
      }
    } else if (*embed) {
      const ExperimentConfig c = ov.build("embed_head");
      const Dataset data = load_prepared_corpus(emb_corpus);
      const RunRecord r = run_embed_head(c, data, read_stacks(emb_stacks, data), model::parse_layer_mode(emb_mode));
      write_run_record(emb_out, r);
      print_summary(r);
    } else if (*stub) {
      const ExperimentConfig c = ov.build("stub_embed");
      const std::uint64_t seed = c.require_seed();
      const Dataset data = load_prepared_corpus(stub_corpus);
      fs::create_directories(stub_out);
      std::vector<model::EmbeddingStack> stacks;
      if (stub_kind == "random") {
        for (const auto& w : data.waveforms) stacks.push_back(model::random_projection_stack(w, stub_layers, stub_dim, seed));
      } else {
        std::vector<std::string> ids;
        for (const auto& clip : data.clips) ids.push_back(clip.clip_id);
        model::PlantedStackSpec spec;
        spec.layers = stub_layers;
        spec.dim = stub_dim;
        spec.seed = seed;
        stacks = model::planted_layer_stacks(ids, data.labels(corpus::parse_trait(stub_trait)), spec);
      }
      for (std::size_t i = 0; i < stacks.size(); ++i) {
        stacks[i].clip_id = data.clips[i].clip_id;
        model::write_embedding_stack(stub_out / (stacks[i].clip_id + ".aftx"), stacks[i]);
      }
      fmt::print("wrote {} stacks to {}\n", stacks.size(), stub_out.string());
    } else if (*baseline) {
      const ExperimentConfig c = ov.build("augment_baseline");
      const AugmentRun run = run_augment_baseline(c, load_prepared_corpus(base_corpus));
      write_run_record(base_out, run.record);
      if (!base_audit.empty()) write_file(base_audit, audit_csv(run.audit));
      print_summary(run.record);
    } else if (*multitask) {
      const ExperimentConfig c = ov.build("multitask");
      std::optional<Checkpoint> ck;
      if (!mt_checkpoint.empty()) ck = load_checkpoint(mt_checkpoint);
      const RunRecord r = run_multitask(c, load_prepared_corpus(mt_corpus), corpus::parse_trait(mt_a),
                                        corpus::parse_trait(mt_b), ck ? &*ck : nullptr, {mt_train_backbone});
      write_run_record(mt_out, r);
      print_summary(r);
    } else if (*corr) {
      const auto table = correlate(load_prepared_corpus(corr_corpus));
      write_file(corr_out, metrics::correlation_table_csv(table));
      if (!corr_json.empty()) write_file(corr_json, metrics::correlation_table_json(table));
      fmt::print("wrote {} pairs to {}\n", table.size(), corr_out.string());
    } else if (*report) {
      write_report(rep_runs, rep_out);
      fmt::print("report written to {}\n", rep_out.string());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
