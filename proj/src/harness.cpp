#include "iclip/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "iclip/mep.hpp"

namespace iclip {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::WoProj: return "wo_proj";
    case Variant::WoMep: return "wo_mep";
    case Variant::WoLora: return "wo_lora";
  }
  throw std::logic_error("unreachable variant");
}

Variant variant_from_string(const std::string& s) {
  if (s == "baseline") return Variant::Baseline;
  if (s == "wo_proj") return Variant::WoProj;
  if (s == "wo_mep") return Variant::WoMep;
  if (s == "wo_lora") return Variant::WoLora;
  throw std::invalid_argument("unknown variant: " + s);
}

namespace {

struct SampleOutput {
  std::array<double, 2> probs;
  std::vector<double> feature;  // empty without projection head
};

SampleOutput forward_sample(const InterClipModel& model, const SamplePair& s,
                            const Vocab& vocab, bool want_feature) {
  const auto tokens = tokenize(s.text, vocab, model.config().max_text_len);
  Tensor fused = model.fused_feature(tokens, s.image);
  Tensor probs = model.classify(fused);
  SampleOutput out;
  out.probs = {probs.data()[0], probs.data()[1]};
  if (want_feature) {
    Tensor feat = model.project(fused);
    out.feature = feat.data();
  }
  return out;
}

double classifier_accuracy(const InterClipModel& model, const Dataset& ds) {
  long correct = 0;
  for (const auto& s : ds.samples) {
    auto out = forward_sample(model, s, ds.vocab, false);
    const int pred = out.probs[1] > out.probs[0] ? 1 : 0;
    if (pred == s.label) ++correct;
  }
  return ds.samples.empty()
             ? 0.0
             : static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace

TrainRun train(const TrainOptions& options, const Dataset& train_set,
               const Dataset* val_set) {
  for (const auto& s : train_set.samples)
    if (!s.has_label)
      throw std::invalid_argument("train: unlabeled sample " + s.id);

  ModelConfig cfg = options.model;
  cfg.vocab_size = train_set.vocab.size();
  const bool with_projection = options.variant != Variant::WoProj;

  TrainRun run;
  run.options = options;
  run.options.model = cfg;
  run.model = std::make_shared<InterClipModel>(cfg, options.seed, with_projection);
  InterClipModel& model = *run.model;

  std::vector<ParamGroup> groups;
  groups.push_back({model.non_lora_trainable_tensors(), options.lr});
  groups.push_back({model.lora_tensors(), options.lora_lr});
  AdamW optimizer(groups, options.adamw);

  const auto first_epoch_batches = batches(
      train_set.size(), static_cast<std::size_t>(options.batch_size),
      options.seed, 0, true);
  const long steps_per_epoch = static_cast<long>(first_epoch_batches.size());
  const long total_steps = steps_per_epoch * options.epochs;
  if (total_steps == 0) return run;

  LrSchedule sched{options.lr, total_steps, options.warmup_fraction,
                   options.min_lr_fraction};
  LrSchedule lora_sched{options.lora_lr, total_steps, options.warmup_fraction,
                        options.min_lr_fraction};

  long step_index = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto epoch_batches =
        epoch == 0 ? first_epoch_batches
                   : batches(train_set.size(),
                             static_cast<std::size_t>(options.batch_size),
                             options.seed, static_cast<std::uint64_t>(epoch),
                             true);
    double epoch_total = 0.0;
    for (const auto& batch : epoch_batches) {
      std::vector<Tensor> fused_rows;
      std::vector<int> labels;
      fused_rows.reserve(batch.size());
      for (std::size_t idx : batch) {
        const auto& s = train_set.samples[idx];
        const auto tokens =
            tokenize(s.text, train_set.vocab, cfg.max_text_len);
        fused_rows.push_back(model.fused_feature(tokens, s.image));
        labels.push_back(s.label);
      }
      Tensor fused = stack_rows(fused_rows);
      Tensor probs = model.classify(fused);
      Tensor lc = loss_bce(probs, labels);
      StepLoss rec;
      rec.loss_c = lc.value();
      Tensor loss = lc;
      if (with_projection) {
        Tensor feats = model.project(fused);
        Tensor lp = loss_proj(feats, labels);
        rec.loss_p = lp.value();
        loss = loss_joint(lc, lp);
      }
      rec.total = loss.value();

      optimizer.zero_grad();
      backward(loss);
      const double lrs[2] = {sched.at(step_index + 1),
                             lora_sched.at(step_index + 1)};
      optimizer.step(lrs);
      ++step_index;
      epoch_total += rec.total;
      run.steps.push_back(rec);
    }
    run.epoch_loss.push_back(epoch_total /
                             static_cast<double>(epoch_batches.size()));
    if (val_set != nullptr) {
      run.val_accuracy.push_back(classifier_accuracy(model, *val_set));
      if (options.stop_at_val_accuracy > 0.0 &&
          run.val_accuracy.back() >= options.stop_at_val_accuracy)
        break;
    }
  }
  return run;
}

TrainRun ablate(Variant variant, TrainOptions options, const Dataset& train_set,
                const Dataset* val_set) {
  options.variant = variant;
  if (variant == Variant::WoLora) {
    options.model.lora_rank = 0;
    options.model.lora_targets.clear();
  }
  return train(options, train_set, val_set);
}

MetricsReport evaluate(const InterClipModel& model, const Dataset& eval_set,
                       bool use_mep, int memory_size, bool normalized_vote) {
  for (const auto& s : eval_set.samples)
    if (!s.has_label)
      throw std::invalid_argument("evaluate: unlabeled sample " + s.id);
  if (eval_set.samples.empty())
    throw std::invalid_argument("evaluate: empty dataset");
  if (use_mep && !model.with_projection())
    throw std::invalid_argument(
        "evaluate: MEP requires a projection head (wo_proj checkpoint?)");

  std::vector<int> preds, labels;
  preds.reserve(eval_set.size());
  if (use_mep) {
    MemoryState memory(memory_size, model.config().d_f);
    for (const auto& s : eval_set.samples) {
      auto out = forward_sample(model, s, eval_set.vocab, true);
      MepSample ms{out.probs, l2_normalize_values(out.feature)};
      preds.push_back(memory.step(ms, normalized_vote).final_label);
      labels.push_back(s.label);
    }
  } else {
    for (const auto& s : eval_set.samples) {
      auto out = forward_sample(model, s, eval_set.vocab, false);
      preds.push_back(out.probs[1] > out.probs[0] ? 1 : 0);
      labels.push_back(s.label);
    }
  }
  MetricsReport report = compute_metrics(preds, labels);
  report.mode_tag =
      use_mep ? "mep(L=" + std::to_string(memory_size) + ")" : "classifier-only";
  return report;
}

SweepResult sweep_memory(const InterClipModel& model, const Dataset& eval_set,
                         const std::vector<int>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("sweep_memory: empty candidate list");
  SweepResult result;
  for (int L : candidates)
    result.rows.push_back({L, evaluate(model, eval_set, true, L)});
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    const auto& b = result.rows[best];
    if (r.report.accuracy > b.report.accuracy ||
        (r.report.accuracy == b.report.accuracy &&
         r.memory_size < b.memory_size))
      best = i;
  }
  result.best_memory_size = result.rows[best].memory_size;
  return result;
}

double probe_accuracy(const Dataset& train_set, const Dataset& test_set,
                      bool text_modality) {
  auto feature = [&](const SamplePair& s) {
    return text_modality ? text_bit_feature(s.text) : image_bit_feature(s.image);
  };
  // one-feature logistic regression, full-batch gradient descent
  double w = 0.0, b = 0.0;
  const double lr = 0.5;
  for (int iter = 0; iter < 500; ++iter) {
    double gw = 0.0, gb = 0.0;
    for (const auto& s : train_set.samples) {
      const double x = feature(s);
      const double p = 1.0 / (1.0 + std::exp(-(w * x + b)));
      const double err = p - static_cast<double>(s.label);
      gw += err * x;
      gb += err;
    }
    const double n = static_cast<double>(train_set.size());
    w -= lr * gw / n;
    b -= lr * gb / n;
  }
  long correct = 0;
  for (const auto& s : test_set.samples) {
    const double p = 1.0 / (1.0 + std::exp(-(w * feature(s) + b)));
    if ((p > 0.5 ? 1 : 0) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

std::string run_manifest_json(const TrainRun& run,
                              const std::string& dataset_provenance,
                              const std::vector<MetricsReport>& final_reports) {
  nlohmann::json j;
  j["config"]["model"] =
      nlohmann::json::parse(model_config_to_json(run.options.model));
  j["config"]["lr"] = run.options.lr;
  j["config"]["lora_lr"] = run.options.lora_lr;
  j["config"]["weight_decay"] = run.options.adamw.weight_decay;
  j["config"]["beta1"] = run.options.adamw.beta1;
  j["config"]["beta2"] = run.options.adamw.beta2;
  j["config"]["epsilon"] = run.options.adamw.eps;
  j["config"]["warmup_fraction"] = run.options.warmup_fraction;
  j["config"]["min_lr_fraction"] = run.options.min_lr_fraction;
  j["config"]["epochs"] = run.options.epochs;
  j["config"]["batch_size"] = run.options.batch_size;
  j["config"]["variant"] = to_string(run.options.variant);
  j["seed"] = run.options.seed;
  j["dataset"] = dataset_provenance;
  j["epoch_loss"] = run.epoch_loss;
  j["val_accuracy"] = run.val_accuracy;
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : final_reports)
    reports.push_back(nlohmann::json::parse(metrics_to_json(r)));
  j["reports"] = std::move(reports);
  return j.dump(2);
}

}  // namespace iclip
