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

#include "afx/experiment/protocol.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "afx/corpus/folds.hpp"
#include "afx/dsp/masking.hpp"
#include "afx/dsp/spectrogram.hpp"
#include "afx/error.hpp"
#include "afx/tensor/ops.hpp"

namespace afx::experiment {

using namespace ops;

namespace {

using model::mix_seed;
using Clock = std::chrono::steady_clock;
using BatchLoss = std::function<Tensor(std::span<const std::size_t>)>;

constexpr std::uint64_t kPretrainInit = 0x50524554;
constexpr std::uint64_t kPretrainShuffle = 0x53485546;
constexpr std::uint64_t kDropoutStream = 0xD7;
constexpr std::uint64_t kTaskB = 0xB;

std::uint64_t trait_seed(std::uint64_t seed, corpus::Trait trait) {
  return mix_seed(seed, static_cast<std::uint64_t>(trait));
}
std::uint64_t fold_head_seed(std::uint64_t seed, corpus::Trait trait, std::size_t fold) {
  return mix_seed(trait_seed(seed, trait), fold);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Trainable {
  ParameterSet* params;
  AdamW* optimizer;
};

// One pass over `indices` in a seeded order; returns the sample-weighted
// mean batch loss.
double train_epoch(std::span<const Trainable> parts, std::vector<std::size_t> indices, std::size_t batch_size,
                   std::uint64_t order_seed, const BatchLoss& loss_fn) {
  std::mt19937_64 rng(order_seed);
  std::shuffle(indices.begin(), indices.end(), rng);
  double total = 0.0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    const std::span<const std::size_t> batch(indices.data() + start, end - start);
    for (const Trainable& p : parts) p.params->zero_grad();
    const Tensor loss = loss_fn(batch);
    total += loss.item() * static_cast<double>(batch.size());
    loss.backward();
    for (const Trainable& p : parts) p.optimizer->step(*p.params);
  }
  return total / static_cast<double>(indices.size());
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.dim(0));
  const std::size_t cols = logits.dim(1);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> gather(std::span<const int> values, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

Tensor gather_rows(std::span<const Tensor> rows, std::span<const std::size_t> idx) {
  std::vector<Tensor> picked;
  picked.reserve(idx.size());
  for (std::size_t i : idx) picked.push_back(rows[i]);
  return stack_rows(picked);
}

void score_fold(FoldResult& result, std::span<const int> truth, std::span<const int> predicted) {
  result.confusion = metrics::ConfusionMatrix::from_predictions(truth, predicted);
  result.uar = metrics::uar(result.confusion);
}

corpus::FoldPlan folds_for(const ExperimentConfig& config, const Dataset& data, corpus::Trait trait,
                           std::uint64_t seed) {
  return corpus::make_folds(data.clips, trait, trait_seed(seed, trait), {config.folds, config.speaker_disjoint});
}

std::vector<Tensor> clip_tensors(const Dataset& data) {
  std::vector<Tensor> out;
  out.reserve(data.size());
  for (const dsp::Waveform& w : data.waveforms) out.emplace_back(Shape{1, w.samples.size()}, w.samples);
  return out;
}

std::vector<Tensor> pooled_features(const model::TransformerSer& backbone, std::span<const Tensor> clips) {
  std::vector<Tensor> out;
  out.reserve(clips.size());
  for (const Tensor& c : clips) out.push_back(backbone.pooled(c).detach());
  return out;
}

AdamWOptions optimizer_options(const ExperimentConfig& config, double lr) {
  AdamWOptions o;
  o.lr = lr;
  o.weight_decay = config.weight_decay;
  return o;
}

// Fresh-head training shared by transfer and embedding runs: `features`
// maps clip indices to a [B × in] batch.
FoldResult fit_head(const ExperimentConfig& config, ParameterSet& params, const model::ClassifierHead& head,
                    const std::function<Tensor(std::span<const std::size_t>)>& features, std::span<const int> labels,
                    const corpus::FoldPlan& plan, std::size_t fold, std::uint64_t head_seed) {
  FoldResult r;
  r.trait = plan.stratify_by;
  r.fold = fold;
  const auto train = plan.train_indices(fold);
  const auto test = plan.test_indices(fold);
  r.train_size = train.size();
  r.test_size = test.size();

  AdamW opt(optimizer_options(config, config.finetune_lr));
  const Trainable parts[] = {{&params, &opt}};
  const BatchLoss loss = [&](std::span<const std::size_t> batch) {
    return softmax_cross_entropy(head.forward(features(batch)), gather(labels, batch));
  };
  for (std::size_t e = 0; e < config.finetune_epochs; ++e) {
    r.epoch_losses.push_back(train_epoch(parts, train, config.batch_size, mix_seed(head_seed, e), loss));
  }
  score_fold(r, gather(labels, test), argmax_rows(head.forward(features(test))));
  return r;
}

std::string backbone_digest(const model::TransformerSer& m) {
  return parameter_digest(m.params(), [](const Parameter& p) { return !model::is_head_parameter(p); });
}

}  // namespace

PretrainResult run_pretrain(const ExperimentConfig& config, const Dataset& emotion, const Checkpoint* resume) {
  config.validate();
  const std::uint64_t seed = config.require_seed();
  const std::vector<int> labels = emotion.labels(config.pretrain_label);
  if (std::count(labels.begin(), labels.end(), 1) == 0 || std::count(labels.begin(), labels.end(), 0) == 0) {
    fail(ErrorCode::kDegenerateLabels,
         std::string(corpus::trait_name(config.pretrain_label)) + " labels are all one class");
  }

  const std::uint64_t init_seed = mix_seed(seed, kPretrainInit);
  if (resume && (resume->label != config.pretrain_label || resume->seed != init_seed)) {
    fail(ErrorCode::kConfigMismatch, "resume checkpoint was trained with another label or seed");
  }
  model::TransformerSer net = resume ? instantiate(*resume, config.model) : model::TransformerSer(config.model, init_seed);
  AdamW opt(optimizer_options(config, config.lr));
  std::size_t done = 0;
  if (resume) {
    opt.load_state(resume->optimizer);
    done = resume->epochs;
  }

  const auto clips = clip_tensors(emotion);
  std::vector<std::size_t> all(emotion.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Trainable parts[] = {{&net.params(), &opt}};
  const BatchLoss loss = [&](std::span<const std::size_t> batch) {
    std::vector<Tensor> picked;
    for (std::size_t i : batch) picked.push_back(clips[i]);
    return softmax_cross_entropy(net.forward_batch(picked), gather(labels, batch));
  };

  PretrainResult result;
  const std::set<std::size_t> grid(config.pretrain_epoch_grid.begin(), config.pretrain_epoch_grid.end());
  for (std::size_t epoch = done + 1; epoch <= *grid.rbegin(); ++epoch) {
    result.epoch_losses.push_back(
        train_epoch(parts, all, config.batch_size, mix_seed(mix_seed(seed, kPretrainShuffle), epoch), loss));
    if (grid.contains(epoch)) {
      Checkpoint ck;
      ck.model = config.model;
      ck.label = config.pretrain_label;
      ck.epochs = epoch;
      ck.seed = init_seed;
      ck.config_hash = config.hash();
      ck.parameters = snapshot_parameters(net.params());
      ck.optimizer = opt.state();
      result.checkpoints.push_back(std::move(ck));
    }
  }
  return result;
}

RunRecord run_transfer(const ExperimentConfig& config, const Checkpoint& checkpoint, const Dataset& personality,
                       const TransferOptions& options) {
  config.validate();
  const std::uint64_t seed = config.require_seed();
  const auto start = Clock::now();
  model::TransformerSer net = instantiate(checkpoint, config.model);
  net.freeze_backbone(seed);
  const std::string digest_before = backbone_digest(net);

  const auto clips = clip_tensors(personality);
  std::vector<Tensor> cached;
  if (options.cache_features) cached = pooled_features(net, clips);
  const auto features = [&](std::span<const std::size_t> idx) {
    if (options.cache_features) return gather_rows(cached, idx);
    std::vector<Tensor> rows;
    for (std::size_t i : idx) rows.push_back(net.pooled(clips[i]));
    return stack_rows(rows);
  };

  RunRecord rec;
  rec.kind = "transfer";
  rec.method = fmt::format("Transformer-based ({}, {} ep.)", corpus::trait_name(checkpoint.label), checkpoint.epochs);
  rec.config_hash = config.hash();
  rec.seed = seed;
  rec.checkpoints.push_back(checkpoint_file_name(checkpoint));
  rec.info["pretrain_label"] = std::string(corpus::trait_name(checkpoint.label));
  rec.info["pretrain_epochs"] = std::to_string(checkpoint.epochs);
  for (corpus::Trait trait : config.traits) {
    const auto labels = personality.labels(trait);
    const corpus::FoldPlan plan = folds_for(config, personality, trait, seed);
    for (std::size_t fold = 0; fold < config.folds; ++fold) {
      const std::uint64_t head_seed = fold_head_seed(seed, trait, fold);
      net.freeze_backbone(head_seed);
      rec.folds.push_back(fit_head(config, net.params(), net.head(), features, labels, plan, fold, head_seed));
    }
  }
  rec.info["backbone_digest_before"] = digest_before;
  rec.info["backbone_digest_after"] = backbone_digest(net);
  rec.wall_time_s = seconds_since(start);
  return rec;
}

AugmentRun run_augment_baseline(const ExperimentConfig& config, const Dataset& personality) {
  config.validate();
  const std::uint64_t seed = config.require_seed();
  const auto start = Clock::now();
  std::vector<dsp::Spectrogram> specs;
  specs.reserve(personality.size());
  for (const dsp::Waveform& w : personality.waveforms) specs.push_back(dsp::log_mel(w));
  const std::size_t mel_bins = specs.front().mel_bins;

  AugmentRun run;
  RunRecord& rec = run.record;
  rec.kind = "augment_baseline";
  rec.method = "Augmentation baseline";
  rec.config_hash = config.hash();
  rec.seed = seed;
  std::string kinds;
  for (dsp::MaskKind k : config.mask_kinds) kinds += (kinds.empty() ? "" : ",") + std::string(dsp::mask_kind_name(k));
  rec.info["mask_kinds"] = kinds;

  for (corpus::Trait trait : config.traits) {
    const auto labels = personality.labels(trait);
    const corpus::FoldPlan plan = folds_for(config, personality, trait, seed);
    for (std::size_t fold = 0; fold < config.folds; ++fold) {
      const std::uint64_t fold_seed = fold_head_seed(seed, trait, fold);
      const auto train = plan.train_indices(fold);
      const auto test = plan.test_indices(fold);

      std::vector<dsp::Spectrogram> train_specs;
      for (std::size_t i : train) train_specs.push_back(specs[i]);
      const auto items = dsp::augment_corpus(train_specs, augment_plan(config, fold_seed));
      std::vector<Tensor> inputs;
      std::vector<int> item_labels;
      for (const dsp::AugmentedItem& item : items) {
        const std::size_t clip = train[item.source_index];
        inputs.push_back(item.spectrogram.to_tensor());
        item_labels.push_back(labels[clip]);
        run.audit.push_back({trait, fold, "train", personality.clips[clip].clip_id, item.tag});
      }
      for (std::size_t i : test) {
        run.audit.push_back({trait, fold, "test", personality.clips[i].clip_id, std::string(dsp::kOriginalTag)});
      }

      model::AugmentBaseline net(config.model, mel_bins, fold_seed, config.baseline_dropout);
      AdamW opt(optimizer_options(config, config.lr));
      std::mt19937_64 dropout_rng(mix_seed(fold_seed, kDropoutStream));
      const Trainable parts[] = {{&net.params(), &opt}};
      const BatchLoss loss = [&](std::span<const std::size_t> batch) {
        std::vector<Tensor> rows;
        for (std::size_t i : batch) rows.push_back(net.forward(inputs[i], true, dropout_rng));
        return softmax_cross_entropy(stack_rows(rows), gather(item_labels, batch));
      };
      std::vector<std::size_t> order(items.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

      FoldResult r;
      r.trait = trait;
      r.fold = fold;
      r.train_size = items.size();
      r.test_size = test.size();
      for (std::size_t e = 0; e < config.finetune_epochs; ++e) {
        r.epoch_losses.push_back(train_epoch(parts, order, config.batch_size, mix_seed(fold_seed, e), loss));
      }
      std::vector<Tensor> rows;
      for (std::size_t i : test) rows.push_back(net.forward(specs[i].to_tensor(), false, dropout_rng));
      score_fold(r, gather(labels, test), argmax_rows(stack_rows(rows)));
      rec.folds.push_back(std::move(r));
    }
  }
  audit_leakage(run.audit);
  rec.wall_time_s = seconds_since(start);
  return run;
}

void audit_leakage(const std::vector<AuditRow>& audit) {
  std::set<std::tuple<corpus::Trait, std::size_t, std::string>> tested;
  for (const AuditRow& row : audit) {
    if (row.role == "test") tested.emplace(row.trait, row.fold, row.clip_id);
  }
  for (const AuditRow& row : audit) {
    if (row.role != "test" && tested.contains({row.trait, row.fold, row.clip_id})) {
      fail(ErrorCode::kInvalidArgument, fmt::format("clip {} is in both training and test for {} fold {}",
                                                    row.clip_id, corpus::trait_name(row.trait), row.fold));
    }
  }
}

std::string audit_csv(const std::vector<AuditRow>& audit) {
  std::string out = "trait,fold,role,clip_id,tag\n";
  for (const AuditRow& r : audit) {
    out += fmt::format("{},{},{},{},{}\n", corpus::trait_name(r.trait), r.fold, r.role, r.clip_id, r.tag);
  }
  return out;
}

RunRecord run_embed_head(const ExperimentConfig& config, const Dataset& personality,
                         const std::map<std::string, model::EmbeddingStack>& stacks, model::LayerMode mode) {
  config.validate();
  const std::uint64_t seed = config.require_seed();
  const auto start = Clock::now();
  std::vector<Tensor> pooled;
  pooled.reserve(personality.size());
  for (const corpus::AnnotatedClip& clip : personality.clips) {
    const auto it = stacks.find(clip.clip_id);
    if (it == stacks.end()) fail(ErrorCode::kMissingEmbedding, "no embedding stack for clip " + clip.clip_id);
    it->second.validate();
    pooled.push_back(mean_rows(model::select_embedding(it->second, mode)));
    if (pooled.back().dim(1) != pooled.front().dim(1)) {
      fail(ErrorCode::kShapeError, "embedding dimension differs across clips at " + clip.clip_id);
    }
  }
  const std::size_t dim = pooled.front().dim(1);
  const auto features = [&](std::span<const std::size_t> idx) { return gather_rows(pooled, idx); };

  RunRecord rec;
  rec.kind = "embed_head";
  rec.method = fmt::format("{} ({}.)", config.embedding_label, model::layer_mode_name(mode));
  rec.config_hash = config.hash();
  rec.seed = seed;
  rec.info["layer_mode"] = std::string(model::layer_mode_name(mode));
  for (corpus::Trait trait : config.traits) {
    const auto labels = personality.labels(trait);
    const corpus::FoldPlan plan = folds_for(config, personality, trait, seed);
    for (std::size_t fold = 0; fold < config.folds; ++fold) {
      const std::uint64_t head_seed = fold_head_seed(seed, trait, fold);
      ParameterSet params;
      const auto head = model::ClassifierHead::create(params, "head", dim, config.model.head_hidden,
                                                      config.model.num_classes, head_seed);
      rec.folds.push_back(fit_head(config, params, head, features, labels, plan, fold, head_seed));
    }
  }
  rec.wall_time_s = seconds_since(start);
  return rec;
}

RunRecord run_multitask(const ExperimentConfig& config, const Dataset& data, corpus::Trait task_a,
                        corpus::Trait task_b, const Checkpoint* backbone, const MultitaskOptions& options) {
  config.validate();
  const std::uint64_t seed = config.require_seed();
  if (!options.train_backbone && !backbone) {
    fail(ErrorCode::kInvalidArgument, "multitask on a frozen backbone needs a checkpoint");
  }
  const auto start = Clock::now();
  const auto labels_a = data.labels(task_a);
  const auto labels_b = data.labels(task_b);
  const auto clips = clip_tensors(data);
  const corpus::FoldPlan plan = folds_for(config, data, task_a, seed);

  std::vector<Tensor> cached;
  if (!options.train_backbone) cached = pooled_features(instantiate(*backbone, config.model), clips);

  RunRecord rec;
  rec.kind = "multitask";
  rec.method = fmt::format("Multitask ({}+{})", corpus::trait_name(task_a), corpus::trait_name(task_b));
  rec.config_hash = config.hash();
  rec.seed = seed;
  if (backbone) rec.checkpoints.push_back(checkpoint_file_name(*backbone));
  rec.info["task_a"] = std::string(corpus::trait_name(task_a));
  rec.info["task_b"] = std::string(corpus::trait_name(task_b));
  rec.info["backbone"] = options.train_backbone ? "trained" : "frozen";

  for (std::size_t fold = 0; fold < config.folds; ++fold) {
    const std::uint64_t seed_a = fold_head_seed(seed, task_a, fold);
    const std::uint64_t seed_b = mix_seed(fold_head_seed(seed, task_b, fold), kTaskB);
    const auto train = plan.train_indices(fold);
    const auto test = plan.test_indices(fold);
    model::MultitaskHead heads(config.model.d_model, config.model.head_hidden, config.model.num_classes, seed_a,
                               seed_b);

    std::optional<model::TransformerSer> trunk;
    std::optional<AdamW> trunk_opt;
    AdamW head_opt(optimizer_options(config, options.train_backbone ? config.lr : config.finetune_lr));
    std::vector<Trainable> parts{{&heads.params(), &head_opt}};
    if (options.train_backbone) {
      if (backbone) trunk.emplace(instantiate(*backbone, config.model));
      else trunk.emplace(config.model, mix_seed(seed_a, kPretrainInit));
      trunk->params().set_trainable(true);
      trunk->params().set_trainable_where(model::is_head_parameter, false);
      trunk_opt.emplace(optimizer_options(config, config.lr));
      parts.push_back({&trunk->params(), &*trunk_opt});
    }
    const auto features = [&](std::span<const std::size_t> idx) {
      if (!trunk) return gather_rows(cached, idx);
      std::vector<Tensor> rows;
      for (std::size_t i : idx) rows.push_back(trunk->pooled(clips[i]));
      return stack_rows(rows);
    };
    const BatchLoss loss = [&](std::span<const std::size_t> batch) {
      const Tensor x = features(batch);
      return model::multitask_loss(heads.task_a().forward(x), heads.task_b().forward(x), gather(labels_a, batch),
                                   gather(labels_b, batch));
    };

    FoldResult ra, rb;
    ra.trait = task_a;
    rb.trait = task_b;
    ra.fold = rb.fold = fold;
    rb.task = "B";
    ra.train_size = rb.train_size = train.size();
    ra.test_size = rb.test_size = test.size();
    for (std::size_t e = 0; e < config.finetune_epochs; ++e) {
      const double l = train_epoch(parts, train, config.batch_size, mix_seed(seed_a, e), loss);
      ra.epoch_losses.push_back(l);
      rb.epoch_losses.push_back(l);
    }
    const Tensor x = features(test);
    score_fold(ra, gather(labels_a, test), argmax_rows(heads.task_a().forward(x)));
    score_fold(rb, gather(labels_b, test), argmax_rows(heads.task_b().forward(x)));
    rec.folds.push_back(std::move(ra));
    rec.folds.push_back(std::move(rb));
  }
  rec.wall_time_s = seconds_since(start);
  return rec;
}

std::vector<metrics::CorrelationEntry> correlate(const Dataset& personality) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < personality.size(); ++i) index[personality.clips[i].clip_id] = i;
  std::map<corpus::Trait, std::vector<double>> scores;
  std::map<corpus::Trait, std::vector<int>> labels;
  for (const corpus::JudgeScores& s : personality.scores) {
    if (!corpus::is_emotion(s.trait)) scores[s.trait] = s.clip_means();
  }
  for (auto& [trait, means] : scores) {
    const corpus::JudgeScores& s =
        *std::find_if(personality.scores.begin(), personality.scores.end(), [&](const auto& x) { return x.trait == trait; });
    std::vector<int>& out = labels[trait];
    for (const std::string& id : s.clip_ids) {
      const auto it = index.find(id);
      if (it == index.end()) fail(ErrorCode::kMissingAnnotation, "scored clip " + id + " is not in the corpus");
      out.push_back(personality.clips[it->second].label(trait));
    }
  }
  return metrics::trait_pair_table(scores, labels);
}

}  // namespace afx::experiment
