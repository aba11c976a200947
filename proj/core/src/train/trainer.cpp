#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ucmar/errors.hpp"
#include "ucmar/loss/loss.hpp"
#include "ucmar/metrics/metrics.hpp"
#include "ucmar/rng.hpp"
#include "ucmar/train/adam.hpp"
#include "ucmar/train/schedule.hpp"
#include "ucmar/train/trainer.hpp"

namespace ucmar {
namespace {

constexpr std::uint64_t kInitStream = 0x696e697400000000ull;
constexpr std::uint64_t kOrderStream = 0x6f72646572000000ull;

std::vector<int> epoch_order(int count, std::uint64_t seed, int epoch) {
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  Rng rng(Rng::derive(seed, kOrderStream + static_cast<std::uint64_t>(epoch)));
  for (int i = count - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_int(0, i));
    std::swap(order[i], order[j]);
  }
  return order;
}

double mean_val_psnr(const Unet<float>& model, const Dataset& dataset, bool exclude_metal) {
  if (dataset.test.empty()) return 0.0;
  double sum = 0.0;
  for (const PairedSample& s : dataset.test) {
    const Image restored = model.restore(s.corrupted);
    sum += psnr(restored, s.clean, 1.0, exclude_metal ? &s.mask.mask : nullptr);
  }
  return sum / static_cast<double>(dataset.test.size());
}

std::string checkpoint_name(int epoch) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "ckpt-epoch-%03d.uckp", epoch);
  return buf;
}

std::string rng_tag(std::uint64_t seed, int completed_epochs) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "seed:%llu/epoch:%d",
                static_cast<unsigned long long>(seed), completed_epochs);
  return buf;
}

// Shared epoch loop for all three training entry points. When store is null
// the supervision is plain RMSE, otherwise the uncertainty-weighted loss with
// each sample's cached map. Checkpoints (when requested) are saved after
// completing epoch e for every (e + 1) in the schedule.
void run_training_loop(Unet<float>& model, const Dataset& dataset, const TrainConfig& config,
                       int epochs, const UncertaintyStore* store,
                       const std::vector<int>* checkpoint_epochs,
                       const std::filesystem::path* checkpoint_dir,
                       CheckpointSet* out_checkpoints, TrainReport* report,
                       const EpochCallback& on_epoch) {
  if (dataset.train.empty()) throw std::invalid_argument("train: dataset has no training samples");
  if (dataset.grid_size != config.grid_size)
    throw std::invalid_argument("train: dataset grid does not match config.grid_size");

  if (store)
    for (const PairedSample& s : dataset.train)
      (void)store->get(s.sample_id);  // IncompleteStoreError when missing

  Adam adam(model.parameter_count(), config.adam_beta1, config.adam_beta2);
  typename Unet<float>::Workspace ws;
  std::vector<float> grad(model.parameter_count());
  const int n = static_cast<int>(dataset.train.size());

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.base_lr, config.min_lr, config.anneal_period);
    const std::vector<int> order = epoch_order(n, config.seed, epoch);
    double loss_sum = 0.0;

    for (int start = 0; start < n; start += config.batch_size) {
      const int batch = std::min(config.batch_size, n - start);
      std::fill(grad.begin(), grad.end(), 0.0f);
      for (int b = 0; b < batch; ++b) {
        const PairedSample& sample = dataset.train[order[start + b]];
        const MaskRaster* mask = config.exclude_metal ? &sample.mask.mask : nullptr;
        const Image pred = model.forward(sample.corrupted, ws);
        const Image* u = store ? &store->get(sample.sample_id).values : nullptr;
        const LossKind kind = store ? LossKind::uc : LossKind::rmse;
        LossGradient lg = loss_gradient(kind, pred, sample.clean, u, mask);
        const LossValue lv = store ? uc_loss(pred, sample.clean, *u, mask)
                                   : rmse_loss(pred, sample.clean, mask);
        if (!std::isfinite(lv.value))
          throw TrainingDivergedError("non-finite loss at epoch " + std::to_string(epoch));
        loss_sum += lv.value;
        if (!lg.degenerate) model.backward(lg.grad, ws, grad);
      }
      const float inv = 1.0f / static_cast<float>(batch);
      for (float& g : grad) g *= inv;
      adam.step(model.parameters(), grad, lr);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = loss_sum / n;
    record.val_psnr = mean_val_psnr(model, dataset, config.exclude_metal);
    if (report) report->epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (checkpoint_epochs && checkpoint_dir &&
        std::find(checkpoint_epochs->begin(), checkpoint_epochs->end(), epoch + 1) !=
            checkpoint_epochs->end()) {
      const std::filesystem::path path = *checkpoint_dir / checkpoint_name(epoch + 1);
      Checkpoint cp = save_checkpoint(model, epoch + 1, record.train_loss,
                                      rng_tag(config.seed, epoch + 1), path);
      if (out_checkpoints) out_checkpoints->members.push_back(std::move(cp));
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  arch().validate();
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(min_lr > 0.0 && min_lr < base_lr))
    throw ConfigError("TrainConfig: need 0 < min_lr < base_lr");
  if (total_epochs < 1) throw ConfigError("TrainConfig: total_epochs must be >= 1");
  if (anneal_period < 1) throw ConfigError("TrainConfig: anneal_period must be >= 1");
  if (phase1_epochs < 1) throw ConfigError("TrainConfig: phase1_epochs must be >= 1");
  if (optimizer != "adam") throw ConfigError("TrainConfig: optimizer must be 'adam'");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("TrainConfig: adam betas must lie in [0, 1)");
  if (checkpoint_epochs.size() < 2)
    throw ConfigError("TrainConfig: need at least 2 checkpoint_epochs");
  for (std::size_t i = 0; i < checkpoint_epochs.size(); ++i) {
    if (checkpoint_epochs[i] < 1 || checkpoint_epochs[i] > phase1_epochs)
      throw ConfigError("TrainConfig: checkpoint_epochs must lie in [1, phase1_epochs]");
    if (i > 0 && checkpoint_epochs[i] <= checkpoint_epochs[i - 1])
      throw ConfigError("TrainConfig: checkpoint_epochs must be strictly increasing");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return nlohmann::json{
      {"batch_size", batch_size},
      {"base_lr", base_lr},
      {"min_lr", min_lr},
      {"total_epochs", total_epochs},
      {"anneal_period", anneal_period},
      {"phase1_epochs", phase1_epochs},
      {"checkpoint_epochs", checkpoint_epochs},
      {"seed", seed},
      {"optimizer", optimizer},
      {"adam_betas", {adam_beta1, adam_beta2}},
      {"grid_size", grid_size},
      {"depth", depth},
      {"base_channels", base_channels},
      {"retrain_mode",
       retrain_mode == RetrainMode::from_scratch ? "from_scratch" : "continue"},
      {"exclude_metal", exclude_metal},
      {"std_divisor", std_divisor == StdDivisor::population ? "population" : "sample"}};
}

CheckpointSet train_phase1(const Dataset& dataset, const TrainConfig& config,
                           const std::filesystem::path& checkpoint_dir, TrainReport* report,
                           const EpochCallback& on_epoch) {
  config.validate();
  std::filesystem::create_directories(checkpoint_dir);
  Unet<float> model(config.arch(), Rng::derive(config.seed, kInitStream));
  CheckpointSet set;
  run_training_loop(model, dataset, config, config.phase1_epochs, nullptr,
                    &config.checkpoint_epochs, &checkpoint_dir, &set, report, on_epoch);
  set.validate();
  return set;
}

UncertaintyStore build_uncertainty_store(const CheckpointSet& checkpoints,
                                         const Dataset& dataset,
                                         const std::filesystem::path& store_dir,
                                         StdDivisor divisor) {
  checkpoints.validate();
  std::vector<int> epochs;
  std::vector<Unet<float>> models;
  epochs.reserve(checkpoints.members.size());
  models.reserve(checkpoints.members.size());
  for (const Checkpoint& cp : checkpoints.members) {
    epochs.push_back(cp.epoch);
    models.push_back(materialize(cp));
  }

  UncertaintyStore store = UncertaintyStore::create(store_dir, epochs, divisor);
  for (const PairedSample& sample : dataset.train) {
    std::vector<Image> restorations;
    restorations.reserve(models.size());
    for (const Unet<float>& m : models) restorations.push_back(m.restore(sample.corrupted));
    UncertaintyMap map = compute_uncertainty(restorations, divisor);
    map.source_sample_id = sample.sample_id;
    map.source_epochs = epochs;
    store.put(map);
  }
  store.finalize();
  return store;
}

TrainResult train_phase2(const Dataset& dataset, const UncertaintyStore& store,
                         const TrainConfig& config, const Checkpoint* init_from,
                         const EpochCallback& on_epoch) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Unet<float> model =
      (config.retrain_mode == TrainConfig::RetrainMode::continue_last && init_from)
          ? materialize(*init_from)
          : Unet<float>(config.arch(), Rng::derive(config.seed, kInitStream));
  TrainReport report;
  report.config_echo = config.to_json();
  run_training_loop(model, dataset, config, config.total_epochs, &store, nullptr, nullptr,
                    nullptr, &report, on_epoch);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return TrainResult{std::move(model), std::move(report)};
}

TrainResult run_baseline(const Dataset& dataset, const TrainConfig& config,
                         const EpochCallback& on_epoch) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Unet<float> model(config.arch(), Rng::derive(config.seed, kInitStream));
  TrainReport report;
  report.config_echo = config.to_json();
  run_training_loop(model, dataset, config, config.total_epochs, nullptr, nullptr, nullptr,
                    nullptr, &report, on_epoch);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return TrainResult{std::move(model), std::move(report)};
}

void write_train_report(const TrainReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    const std::filesystem::path path = dir / "report.jsonl";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const EpochRecord& r : report.epochs) {
      const nlohmann::json row{
          {"epoch", r.epoch}, {"lr", r.lr}, {"train_loss", r.train_loss},
          {"val_psnr", r.val_psnr}};
      out << row.dump() << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
  }
  {
    nlohmann::json summary{{"epoch_rows", report.epochs.size()},
                           {"phase1_epochs", report.phase1_epochs},
                           {"wall_seconds", report.wall_seconds},
                           {"final_checkpoint", report.final_checkpoint},
                           {"config", report.config_echo}};
    if (!report.epochs.empty()) {
      summary["final_train_loss"] = report.epochs.back().train_loss;
      summary["final_val_psnr"] = report.epochs.back().val_psnr;
    }
    const std::filesystem::path path = dir / "summary.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << summary.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path.string());
  }
}

}  // namespace ucmar
