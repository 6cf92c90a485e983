#ifndef ICLIP_HARNESS_HPP
#define ICLIP_HARNESS_HPP

#include <memory>
#include <string>
#include <vector>

#include "iclip/data.hpp"
#include "iclip/metrics.hpp"
#include "iclip/model.hpp"
#include "iclip/optim.hpp"

namespace iclip {

enum class Variant { Baseline, WoProj, WoMep, WoLora };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct TrainOptions {
  ModelConfig model;
  double lr = 5e-4;
  double lora_lr = 1e-4;
  AdamWOptions adamw;
  double warmup_fraction = 0.2;
  double min_lr_fraction = 0.01;
  int epochs = 3;
  int batch_size = 8;
  std::uint64_t seed = 0;
  Variant variant = Variant::Baseline;
  // With a val set, stop after any epoch whose accuracy reaches this value
  // (0 disables). The lr schedule still spans the full requested run.
  double stop_at_val_accuracy = 0.0;
};

struct StepLoss {
  double loss_c = 0.0;
  double loss_p = 0.0;
  double total = 0.0;
};

struct TrainRun {
  TrainOptions options;
  std::vector<StepLoss> steps;
  std::vector<double> epoch_loss;      // mean total loss per epoch
  std::vector<double> val_accuracy;    // per epoch, empty without a val set
  std::shared_ptr<InterClipModel> model;
};

/// Trains with the joint objective, AdamW in two parameter groups (LoRA at
/// lora_lr, everything else at lr) under a shared cosine-with-warmup
/// schedule. Deterministic given the seed.
TrainRun train(const TrainOptions& options, const Dataset& train_set,
               const Dataset* val_set = nullptr);

/// Applies the ablation variant's config adjustments, then trains.
TrainRun ablate(Variant variant, TrainOptions options, const Dataset& train_set,
                const Dataset* val_set = nullptr);

MetricsReport evaluate(const InterClipModel& model, const Dataset& eval_set,
                       bool use_mep, int memory_size,
                       bool normalized_vote = false);

struct SweepRow {
  int memory_size;
  MetricsReport report;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  int best_memory_size = 0;  // best accuracy, ties toward the smallest L
};

SweepResult sweep_memory(const InterClipModel& model, const Dataset& eval_set,
                         const std::vector<int>& candidates);

/// Accuracy of a one-feature logistic probe (text lexicon balance or image
/// brightness) fit on the train split and scored on the test split.
double probe_accuracy(const Dataset& train_set, const Dataset& test_set,
                      bool text_modality);

/// Run manifest as stable JSON (no timestamps): config snapshot, seed,
/// dataset provenance, loss curve, and any final reports.
std::string run_manifest_json(const TrainRun& run,
                              const std::string& dataset_provenance,
                              const std::vector<MetricsReport>& final_reports);

}  // namespace iclip

#endif  // ICLIP_HARNESS_HPP
