#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "support/oracles.hpp"
#include "support/subprocess.hpp"
#include "ucmar/errors.hpp"
#include "ucmar/io/run_config.hpp"
#include "ucmar/io/viz.hpp"

using namespace ucmar;
using nlohmann::json;

TEST_CASE("an empty document resolves to the documented defaults") {
  const RunConfig cfg = RunConfig::from_json(json::object());
  CHECK(cfg.dataset.grid_size == 64);
  CHECK(cfg.dataset.train_count == 200);
  CHECK(cfg.dataset.test_count == 50);
  CHECK(cfg.dataset.seed == 0);
  CHECK(cfg.dataset_dir == "dataset");
  CHECK(cfg.train.total_epochs == 60);
  CHECK(cfg.train.phase1_epochs == 10);
  CHECK(cfg.train.checkpoint_epochs == std::vector<int>{2, 4, 6, 8, 10});
  CHECK(cfg.train.base_lr == 1e-4);
  CHECK(cfg.train.depth == 3);
  CHECK(cfg.train.base_channels == 16);
  CHECK(cfg.train.batch_size == 4);
}

TEST_CASE("the resolved echo is a fixed point of parsing") {
  json doc;
  doc["dataset"]["grid_size"] = 32;
  doc["dataset"]["train_count"] = 5;
  doc["train"]["seed"] = 9;
  doc["train"]["checkpoint_epochs"] = {3, 5};
  const RunConfig cfg = RunConfig::from_json(doc);
  CHECK(cfg.dataset.grid_size == 32);
  CHECK(cfg.train.seed == 9);
  // grid_size flows into the architecture input size.
  CHECK(cfg.train.grid_size == 32);

  const json echo = cfg.resolved();
  const RunConfig again = RunConfig::from_json(echo);
  CHECK(again.resolved() == echo);
  CHECK(again.hash() == cfg.hash());
}

TEST_CASE("config hashes are stable 16-digit hex strings") {
  const RunConfig a = RunConfig::from_json(json::object());
  const RunConfig b = RunConfig::from_json(json::object());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  for (char c : a.hash()) CHECK(std::isxdigit(static_cast<unsigned char>(c)));

  json doc;
  doc["train"]["seed"] = 1;
  CHECK(RunConfig::from_json(doc).hash() != a.hash());

  // The standalone hash helper is deterministic and collision-sensitive.
  CHECK(fnv1a64_hex("abc") == fnv1a64_hex("abc"));
  CHECK(fnv1a64_hex("abc") != fnv1a64_hex("abd"));
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  json doc;
  doc["trian"] = json::object();
  bool threw = false;
  try {
    RunConfig::from_json(doc);
  } catch (const ConfigError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("trian") != std::string::npos);
  }
  CHECK(threw);

  json nested;
  nested["train"]["bogus_knob"] = 3;
  threw = false;
  try {
    RunConfig::from_json(nested);
  } catch (const ConfigError& e) {
    threw = true;
    const std::string what = e.what();
    CHECK(what.find("train") != std::string::npos);
    CHECK(what.find("bogus_knob") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("type and value errors name the offending field") {
  json doc;
  doc["dataset"]["grid_size"] = "sixty-four";
  bool threw = false;
  try {
    RunConfig::from_json(doc);
  } catch (const ConfigError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("grid_size") != std::string::npos);
  }
  CHECK(threw);

  json small;
  small["dataset"]["grid_size"] = 16;  // below the supported minimum
  CHECK_THROWS_AS(RunConfig::from_json(small), ConfigError);

  json mode;
  mode["train"]["retrain_mode"] = "warm";
  CHECK_THROWS_AS(RunConfig::from_json(mode), ConfigError);

  json betas;
  betas["train"]["adam_betas"] = {0.9};
  CHECK_THROWS_AS(RunConfig::from_json(betas), ConfigError);

  // Documents must be objects.
  CHECK_THROWS_AS(RunConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("from_file reports unreadable and unparseable inputs") {
  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/config.json"), IoError);
  const auto dir = testsup::scratch_dir("config-io");
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(RunConfig::from_file(dir / "bad.json"), ConfigError);
  {
    std::ofstream out(dir / "good.json");
    out << R"({"dataset": {"grid_size": 32}})";
  }
  CHECK(RunConfig::from_file(dir / "good.json").dataset.grid_size == 32);
}

TEST_CASE("the heat colormap anchors are exact") {
  CHECK(uncertainty_color(0.0) == std::array<unsigned char, 3>{0, 0, 0});
  CHECK(uncertainty_color(1.0 / 3.0) == std::array<unsigned char, 3>{255, 0, 0});
  CHECK(uncertainty_color(2.0 / 3.0) == std::array<unsigned char, 3>{255, 255, 0});
  CHECK(uncertainty_color(1.0) == std::array<unsigned char, 3>{255, 255, 255});
  // Out-of-range inputs clamp rather than wrap.
  CHECK(uncertainty_color(-0.5) == uncertainty_color(0.0));
  CHECK(uncertainty_color(1.5) == uncertainty_color(1.0));
}

TEST_CASE("panels lay out one tile per column with fixed gutters") {
  const int grid = 32, gutter = 2;
  const Image corrupted = oracle::random_image(1, grid, grid);
  const Image r1 = oracle::random_image(2, grid, grid);
  const Image r2 = oracle::random_image(3, grid, grid);
  const Image unc = oracle::random_image(4, grid, grid);
  const Image restored = oracle::random_image(5, grid, grid);
  const Image truth = oracle::random_image(6, grid, grid);

  PanelInputs inputs;
  inputs.corrupted = &corrupted;
  inputs.restorations = {&r1, &r2};
  inputs.uncertainty = &unc;
  inputs.uc_restored = &restored;
  inputs.ground_truth = &truth;

  const RgbImage panel = render_panel(inputs);
  const int n = 6;  // corrupted + 2 restorations + heat + restored + truth
  CHECK(panel.cols == n * grid + (n + 1) * gutter);
  CHECK(panel.rows == grid + 2 * gutter);
  CHECK(panel.rgb.size() == static_cast<std::size_t>(panel.rows) * panel.cols * 3);

  // Adding a zoom box doubles the tile rows.
  inputs.zoom = ZoomBox{4, 4, 8, 8};
  const RgbImage zoomed = render_panel(inputs);
  CHECK(zoomed.cols == panel.cols);
  CHECK(zoomed.rows == 2 * grid + 3 * gutter);

  // Deterministic: the same inputs compose the same bytes.
  CHECK(render_panel(inputs).rgb == zoomed.rgb);
}

TEST_CASE("panel validation rejects incomplete or out-of-range inputs") {
  const Image img = oracle::random_image(7, 32, 32);
  PanelInputs inputs;
  inputs.corrupted = &img;
  inputs.restorations = {&img, &img};
  inputs.uncertainty = &img;
  inputs.uc_restored = &img;
  inputs.ground_truth = &img;
  CHECK_NOTHROW(render_panel(inputs));

  PanelInputs missing = inputs;
  missing.ground_truth = nullptr;
  CHECK_THROWS_AS(render_panel(missing), std::invalid_argument);

  PanelInputs empty = inputs;
  empty.restorations.clear();
  CHECK_THROWS_AS(render_panel(empty), std::invalid_argument);

  const Image small = oracle::random_image(8, 16, 16);
  PanelInputs mismatched = inputs;
  mismatched.ground_truth = &small;
  CHECK_THROWS_AS(render_panel(mismatched), std::invalid_argument);

  PanelInputs oob = inputs;
  oob.zoom = ZoomBox{28, 28, 8, 8};  // spills past the 32-pixel grid
  CHECK_THROWS_AS(render_panel(oob), std::invalid_argument);
  oob.zoom = ZoomBox{0, 0, 1, 1};  // degenerate box
  CHECK_THROWS_AS(render_panel(oob), std::invalid_argument);
}

TEST_CASE("png files land on disk with the png signature") {
  const auto dir = testsup::scratch_dir("png-io");
  RgbImage img;
  img.rows = 4;
  img.cols = 5;
  img.rgb.assign(static_cast<std::size_t>(4) * 5 * 3, 128);
  const auto path = dir / "tile.png";
  write_png(path, img);
  const std::string bytes = testsup::file_bytes(path);
  REQUIRE(bytes.size() >= 8);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x89);
  CHECK(bytes.substr(1, 3) == "PNG");
  CHECK_THROWS_AS(write_png("/nonexistent-dir/x.png", img), IoError);
}
