#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ucmar/model/checkpoint.hpp"
#include "ucmar/sim/dataset.hpp"
#include "ucmar/uncertainty/store.hpp"

namespace ucmar {

struct TrainConfig {
  int batch_size = 4;
  double base_lr = 1e-4;
  double min_lr = 1e-6;
  int total_epochs = 60;
  int anneal_period = 120;
  int phase1_epochs = 10;
  std::vector<int> checkpoint_epochs = {2, 4, 6, 8, 10};  // 1-based completed epochs
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int grid_size = 64;
  int depth = 3;
  int base_channels = 16;
  enum class RetrainMode { from_scratch, continue_last } retrain_mode = RetrainMode::from_scratch;
  bool exclude_metal = true;
  StdDivisor std_divisor = StdDivisor::population;

  ArchitectureConfig arch() const { return {depth, base_channels, grid_size}; }
  void validate() const;
  nlohmann::json to_json() const;
};

struct EpochRecord {
  int epoch = 0;  // 0-based schedule index
  double lr = 0.0;
  double train_loss = 0.0;  // mean per-sample loss over the epoch
  double val_psnr = 0.0;    // mean test-set PSNR after the epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int phase1_epochs = 0;  // 0 when the run had no uncertainty phase
  double wall_seconds = 0.0;
  std::string final_checkpoint;
  nlohmann::json config_echo;
};

struct TrainResult {
  Unet<float> model;
  TrainReport report;
};

/// Invoked after every completed epoch (progress reporting).
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Phase 1: RMSE training for config.phase1_epochs epochs, saving a
/// checkpoint after each epoch listed in config.checkpoint_epochs (files
/// under checkpoint_dir). Deterministic in config.seed: the init draw and
/// each epoch's sample order derive from it. Throws TrainingDivergedError on
/// a non-finite loss (already-saved checkpoints remain on disk).
CheckpointSet train_phase1(const Dataset& dataset, const TrainConfig& config,
                           const std::filesystem::path& checkpoint_dir,
                           TrainReport* report = nullptr,
                           const EpochCallback& on_epoch = {});

/// Ensemble-infers every training sample through the checkpoint set and
/// persists one uncertainty map per sample id under store_dir.
UncertaintyStore build_uncertainty_store(const CheckpointSet& checkpoints,
                                         const Dataset& dataset,
                                         const std::filesystem::path& store_dir,
                                         StdDivisor divisor);

/// Phase 2: trains for config.total_epochs epochs under the
/// uncertainty-weighted loss, each sample paired with its stored map. By
/// default the model is rebuilt from scratch with the same init seed as
/// phase 1; pass init_from to continue from a phase-1 checkpoint instead
/// (retrain_mode continue_last).
TrainResult train_phase2(const Dataset& dataset, const UncertaintyStore& store,
                         const TrainConfig& config, const Checkpoint* init_from = nullptr,
                         const EpochCallback& on_epoch = {});

/// Control arm: identical loop with the plain RMSE loss for
/// config.total_epochs epochs, no phase split, no uncertainty store.
TrainResult run_baseline(const Dataset& dataset, const TrainConfig& config,
                         const EpochCallback& on_epoch = {});

/// Persists a report as report.jsonl (one epoch record per line) plus
/// summary.json under dir.
void write_train_report(const TrainReport& report, const std::filesystem::path& dir);

}  // namespace ucmar
