// ucmar -- one pipeline per invocation: synth | train | eval | viz.
//
// Exit codes: 0 ok, 2 validation, 3 training diverged, 4 I/O. Every failure
// prints a single stderr line "ERROR:<code>:<message>". Progress goes to
// stderr; machine-consumable results (run directory, metric table) to stdout.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ucmar/errors.hpp"
#include "ucmar/io/png_io.hpp"
#include "ucmar/io/run_config.hpp"
#include "ucmar/io/viz.hpp"
#include "ucmar/metrics/metrics.hpp"
#include "ucmar/model/checkpoint.hpp"
#include "ucmar/sim/dataset.hpp"
#include "ucmar/train/trainer.hpp"
#include "ucmar/uncertainty/store.hpp"
#include "ucmar/uncertainty/uncertainty.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

// Collapses a (possibly multi-line) exception message onto one line so the
// ERROR:<code>: contract stays machine-parseable.
std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

int fail(int code, const std::string& message) {
  std::cerr << "ERROR:" << code << ":" << one_line(message) << "\n";
  return code;
}

ucmar::RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                             bool seed_is_dataset) {
  ucmar::RunConfig cfg = ucmar::RunConfig::from_file(path);
  if (seed) {
    if (seed_is_dataset)
      cfg.dataset.seed = *seed;
    else
      cfg.train.seed = *seed;
  }
  return cfg;
}

ucmar::Dataset load_dataset_checked(const fs::path& dir, int expect_grid) {
  if (!fs::exists(dir / "manifest.json"))
    throw ucmar::ConfigError("dataset manifest not found: " + (dir / "manifest.json").string() +
                             " (run `ucmar synth` first)");
  ucmar::Dataset data = ucmar::load_dataset(dir);
  if (expect_grid > 0 && data.grid_size != expect_grid)
    throw ucmar::ConfigError("dataset grid_size " + std::to_string(data.grid_size) +
                             " does not match configured grid_size " +
                             std::to_string(expect_grid));
  return data;
}

json read_run_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / "config.json";
  if (!fs::exists(path))
    throw ucmar::ConfigError("run directory missing config.json: " + run_dir.string());
  std::ifstream in(path, std::ios::binary);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ucmar::ConfigError("unreadable run manifest " + path.string() + ": " + e.what());
  }
  return doc;
}

void progress_line(const char* phase, int total, const ucmar::EpochRecord& r) {
  std::fprintf(stderr, "[%s] epoch %3d/%d  lr %.3e  loss %.6f  val %.2f dB\n", phase,
               r.epoch + 1, total, r.lr, r.train_loss, r.val_psnr);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // empty: config's dataset.dir
  bool deterministic = false;
};

int cmd_synth(const SynthArgs& args) {
  const ucmar::RunConfig cfg = load_config(args.config_path, args.seed, /*seed_is_dataset=*/true);
  const fs::path out_dir = args.out_dir.empty() ? fs::path(cfg.dataset_dir)
                                                : fs::path(args.out_dir);

  std::fprintf(stderr, "[synth] grid %d, %d train + %d test pairs, seed %llu\n",
               cfg.dataset.grid_size, cfg.dataset.train_count, cfg.dataset.test_count,
               (unsigned long long)cfg.dataset.seed);
  const ucmar::Dataset data = ucmar::synthesize_dataset(cfg.dataset);
  ucmar::write_dataset(data, cfg.dataset, out_dir);
  std::cout << out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string arm = "uc";
  std::string out_root = "runs";
  std::string data_dir;  // empty: config's dataset.dir
  bool deterministic = false;
};

int cmd_train(const TrainArgs& args) {
  if (args.arm != "uc" && args.arm != "baseline")
    throw ucmar::ConfigError("unknown --arm '" + args.arm + "' (expected uc or baseline)");

  const auto wall_start = std::chrono::steady_clock::now();
  const ucmar::RunConfig cfg = load_config(args.config_path, args.seed, /*seed_is_dataset=*/false);
  const fs::path data_dir = args.data_dir.empty() ? fs::path(cfg.dataset_dir)
                                                  : fs::path(args.data_dir);
  const ucmar::Dataset data = load_dataset_checked(data_dir, cfg.train.grid_size);

  // Content-addressed run directory: same config + arm always lands in the
  // same place, different configs can never overwrite each other.
  json hashed = cfg.resolved();
  hashed["arm"] = args.arm;
  const std::string run_hash = ucmar::fnv1a64_hex(hashed.dump());
  const fs::path run_dir = fs::path(args.out_root) / ("run-" + args.arm + "-" + run_hash);
  fs::create_directories(run_dir);

  const json run_manifest{{"arm", args.arm},
                          {"deterministic", args.deterministic},
                          {"data_dir", data_dir.string()},
                          {"hash", run_hash},
                          {"config", cfg.resolved()}};
  {
    std::ofstream out(run_dir / "config.json", std::ios::binary | std::ios::trunc);
    if (!out) throw ucmar::IoError("cannot write " + (run_dir / "config.json").string());
    out << run_manifest.dump(2) << "\n";
  }

  ucmar::TrainReport report;
  if (args.arm == "uc") {
    std::fprintf(stderr, "[train] uc arm: phase1 %d epochs, phase2 %d epochs, seed %llu\n",
                 cfg.train.phase1_epochs, cfg.train.total_epochs,
                 (unsigned long long)cfg.train.seed);
    ucmar::TrainReport phase1_report;
    const ucmar::CheckpointSet checkpoints = ucmar::train_phase1(
        data, cfg.train, run_dir / "checkpoints", &phase1_report,
        [&](const ucmar::EpochRecord& r) { progress_line("phase1", cfg.train.phase1_epochs, r); });

    std::fprintf(stderr, "[train] building uncertainty store (%d checkpoints, %zu samples)\n",
                 checkpoints.size(), data.train.size());
    const ucmar::UncertaintyStore store = ucmar::build_uncertainty_store(
        checkpoints, data, run_dir / "uncertainty", cfg.train.std_divisor);

    const ucmar::Checkpoint* init_from =
        cfg.train.retrain_mode == ucmar::TrainConfig::RetrainMode::continue_last
            ? &checkpoints.members.back()
            : nullptr;
    ucmar::TrainResult phase2 = ucmar::train_phase2(
        data, store, cfg.train, init_from,
        [&](const ucmar::EpochRecord& r) { progress_line("phase2", cfg.train.total_epochs, r); });

    report.epochs = std::move(phase1_report.epochs);
    report.epochs.insert(report.epochs.end(), phase2.report.epochs.begin(),
                         phase2.report.epochs.end());
    report.phase1_epochs = cfg.train.phase1_epochs;
    ucmar::save_checkpoint(phase2.model, cfg.train.total_epochs,
                           phase2.report.epochs.back().train_loss,
                           "seed:" + std::to_string(cfg.train.seed) + "/final",
                           run_dir / "final.uckp");
  } else {
    std::fprintf(stderr, "[train] baseline arm: %d epochs, seed %llu\n", cfg.train.total_epochs,
                 (unsigned long long)cfg.train.seed);
    ucmar::TrainResult result = ucmar::run_baseline(
        data, cfg.train,
        [&](const ucmar::EpochRecord& r) { progress_line("baseline", cfg.train.total_epochs, r); });
    const double final_loss = result.report.epochs.back().train_loss;
    report.epochs = std::move(result.report.epochs);
    report.phase1_epochs = 0;
    ucmar::save_checkpoint(result.model, cfg.train.total_epochs, final_loss,
                           "seed:" + std::to_string(cfg.train.seed) + "/final",
                           run_dir / "final.uckp");
  }

  report.final_checkpoint = "final.uckp";  // relative: reports stay location-independent
  report.config_echo = run_manifest;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  ucmar::write_train_report(report, run_dir);

  std::fprintf(stderr, "[train] done in %.1f s, final val %.2f dB\n", report.wall_seconds,
               report.epochs.back().val_psnr);
  std::cout << run_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::vector<std::string> run_dirs;
  std::string data_dir;  // empty: first run's recorded data_dir
  std::string out_dir = "eval";
};

int cmd_eval(const EvalArgs& args) {
  struct LoadedRun {
    std::string arm;
    json manifest;
    ucmar::Unet<float> model;
  };
  std::vector<LoadedRun> runs;
  for (const std::string& dir : args.run_dirs) {
    json manifest = read_run_manifest(dir);
    const std::string arm = manifest.value("arm", "unknown");
    ucmar::Unet<float> model =
        ucmar::materialize(ucmar::load_checkpoint(fs::path(dir) / "final.uckp"));
    runs.push_back(LoadedRun{arm, std::move(manifest), std::move(model)});
  }

  std::string data_dir = args.data_dir;
  if (data_dir.empty())
    data_dir = runs.front().manifest.value("data_dir", std::string("dataset"));
  const ucmar::Dataset data =
      load_dataset_checked(data_dir, runs.front().model.config().grid_size);

  // Baseline rows come first so the improvement columns are computed against
  // them; duplicate arms get a numeric suffix to keep tags unique.
  std::stable_sort(runs.begin(), runs.end(), [](const LoadedRun& a, const LoadedRun& b) {
    return (a.arm != "uc") && (b.arm == "uc");
  });
  ucmar::MetricReport metrics;
  std::map<std::string, int> arm_seen;
  for (const LoadedRun& run : runs) {
    if (run.model.config().grid_size != data.grid_size)
      throw ucmar::ConfigError("run model grid_size " +
                               std::to_string(run.model.config().grid_size) +
                               " does not match dataset grid_size " +
                               std::to_string(data.grid_size));
    std::string tag = run.arm;
    const int n = ++arm_seen[run.arm];
    if (n > 1) tag += "-" + std::to_string(n);
    ucmar::EvalPolicy policy;
    if (run.manifest.contains("config") && run.manifest["config"].contains("train"))
      policy.exclude_metal = run.manifest["config"]["train"].value("exclude_metal", true);
    std::fprintf(stderr, "[eval] %s: %zu test samples\n", tag.c_str(), data.test.size());
    metrics.rows.push_back(
        ucmar::evaluate(run.model, data.test, policy, tag, /*uc_loss_flag=*/run.arm == "uc"));
  }

  const std::string table = ucmar::metric_report_table(metrics);
  fs::create_directories(args.out_dir);
  {
    const fs::path path = fs::path(args.out_dir) / "metrics.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ucmar::IoError("cannot write " + path.string());
    out << ucmar::metric_report_json(metrics).dump(2) << "\n";
  }
  {
    const fs::path path = fs::path(args.out_dir) / "metrics.txt";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ucmar::IoError("cannot write " + path.string());
    out << table;
  }
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------------
// viz

std::optional<ucmar::ZoomBox> parse_zoom(const std::string& text) {
  if (text.empty()) return std::nullopt;
  ucmar::ZoomBox box;
  char trailing = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &box.x, &box.y, &box.w, &box.h, &trailing) != 4)
    throw ucmar::ConfigError("--zoom expects x,y,w,h (got '" + text + "')");
  return box;
}

struct VizArgs {
  std::string run_dir;
  std::vector<std::string> sample_ids;
  std::string data_dir;  // empty: run's recorded data_dir
  std::string zoom;
  std::string out_dir;  // empty: <run>/figures
};

int cmd_viz(const VizArgs& args) {
  const fs::path run_dir(args.run_dir);
  const json manifest = read_run_manifest(run_dir);
  const std::optional<ucmar::ZoomBox> zoom = parse_zoom(args.zoom);

  std::string data_dir = args.data_dir;
  if (data_dir.empty()) data_dir = manifest.value("data_dir", std::string("dataset"));
  const ucmar::Dataset data = load_dataset_checked(data_dir, 0);

  // The restoration strip needs the phase-1 ensemble, so viz requires a
  // uc-arm run directory.
  ucmar::CheckpointSet checkpoints;
  const fs::path ckpt_dir = run_dir / "checkpoints";
  if (fs::exists(ckpt_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ckpt_dir))
      if (entry.path().extension() == ".uckp") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files)
      checkpoints.members.push_back(ucmar::load_checkpoint(file));
  }
  if (checkpoints.size() < 2)
    throw ucmar::ConfigError("run has no checkpoint ensemble (viz needs a uc-arm run): " +
                             ckpt_dir.string());
  checkpoints.validate();

  const ucmar::Unet<float> final_model =
      ucmar::materialize(ucmar::load_checkpoint(run_dir / "final.uckp"));

  std::optional<ucmar::UncertaintyStore> store;
  if (fs::exists(run_dir / "uncertainty" / "uncertainty_manifest.json"))
    store = ucmar::UncertaintyStore::open(run_dir / "uncertainty");

  const fs::path out_dir = args.out_dir.empty() ? run_dir / "figures" : fs::path(args.out_dir);
  fs::create_directories(out_dir);

  for (const std::string& id : args.sample_ids) {
    const ucmar::PairedSample* sample = nullptr;
    for (const auto& s : data.test)
      if (s.sample_id == id) sample = &s;
    for (const auto& s : data.train)
      if (s.sample_id == id) sample = &s;
    if (!sample) throw ucmar::ConfigError("unknown sample id '" + id + "' in " + data_dir);

    const std::vector<ucmar::Image> restorations =
        ucmar::ensemble_infer(checkpoints, sample->corrupted);
    ucmar::Image uncertainty;
    if (store && store->contains(id))
      uncertainty = store->get(id).values;
    else
      uncertainty = ucmar::compute_uncertainty(restorations).values;
    const ucmar::Image restored = final_model.restore(sample->corrupted);

    ucmar::PanelInputs inputs;
    inputs.corrupted = &sample->corrupted;
    for (const ucmar::Image& r : restorations) inputs.restorations.push_back(&r);
    inputs.uncertainty = &uncertainty;
    inputs.uc_restored = &restored;
    inputs.ground_truth = &sample->clean;
    inputs.zoom = zoom;

    const fs::path png_path = out_dir / (id + ".png");
    ucmar::write_png(png_path, ucmar::render_panel(inputs));
    std::fprintf(stderr, "[viz] %s: %d restorations -> %s\n", id.c_str(), checkpoints.size(),
                 png_path.string().c_str());
    std::cout << png_path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-guided CT metal-artifact restoration pipeline"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "synthesize the paired dataset onto disk");
  synth->add_option("--config", synth_args.config_path, "run config JSON")->required();
  synth->add_option("--seed", synth_args.seed, "override dataset.seed");
  synth->add_option("--out", synth_args.out_dir, "output directory (default: config dataset.dir)");
  synth->add_flag("--deterministic", synth_args.deterministic,
                  "record deterministic mode (all commands are deterministic)");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train one arm (uc or baseline)");
  train->add_option("--config", train_args.config_path, "run config JSON")->required();
  train->add_option("--arm", train_args.arm, "uc | baseline");
  train->add_option("--seed", train_args.seed, "override train.seed");
  train->add_option("--out", train_args.out_root, "runs root directory (default: runs)");
  train->add_option("--data", train_args.data_dir,
                    "dataset directory (default: config dataset.dir)");
  train->add_flag("--deterministic", train_args.deterministic,
                  "record deterministic mode (all commands are deterministic)");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate run directories on the test split");
  eval_cmd->add_option("--run", eval_args.run_dirs, "run directory (repeatable)")->required();
  eval_cmd->add_option("--data", eval_args.data_dir, "dataset directory (default: first run's)");
  eval_cmd->add_option("--out", eval_args.out_dir, "metrics output directory (default: eval)");

  VizArgs viz_args;
  CLI::App* viz = app.add_subcommand("viz", "render comparison panels for samples");
  viz->add_option("--run", viz_args.run_dir, "uc-arm run directory")->required();
  viz->add_option("--sample", viz_args.sample_ids, "sample id (repeatable)")->required();
  viz->add_option("--data", viz_args.data_dir, "dataset directory (default: run's)");
  viz->add_option("--zoom", viz_args.zoom, "zoom box as x,y,w,h");
  viz->add_option("--out", viz_args.out_dir, "figure directory (default: <run>/figures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitValidation, std::string(e.what()) + " (see --help)");
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (viz->parsed()) return cmd_viz(viz_args);
    return fail(kExitValidation, "no command selected");
  } catch (const ucmar::TrainingDivergedError& e) {
    return fail(kExitDiverged, e.what());
  } catch (const ucmar::ChecksumError& e) {
    return fail(kExitIo, e.what());
  } catch (const ucmar::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kExitIo, e.what());
  } catch (const ucmar::ConfigError& e) {
    return fail(kExitValidation, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitValidation, e.what());
  } catch (const ucmar::InvalidInputError& e) {
    return fail(kExitValidation, e.what());
  } catch (const ucmar::IncompatibleCheckpointError& e) {
    return fail(kExitValidation, e.what());
  } catch (const ucmar::IncompleteStoreError& e) {
    return fail(kExitValidation, e.what());
  } catch (const json::exception& e) {
    return fail(kExitValidation, e.what());
  } catch (const std::exception& e) {
    return fail(kExitIo, e.what());
  }
}
