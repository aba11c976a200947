#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ucmar/sim/synthesis.hpp"

namespace ucmar {

/// Desk-scale dataset recipe: procedural phantoms paired with procedural
/// implant masks, corrupted through the scan geometry.
struct DatasetConfig {
  int grid_size = 64;
  int train_count = 200;
  int test_count = 50;
  std::uint64_t seed = 0;
  ScanGeometry geometry{};

  void validate() const;
};

struct Dataset {
  std::vector<PairedSample> train;
  std::vector<PairedSample> test;
  int grid_size = 0;
};

/// Generates the full train/test split in memory. Deterministic in
/// config.seed; regeneration is bit-identical.
Dataset synthesize_dataset(const DatasetConfig& config);

/// Writes manifest.json plus one raster file per image/mask under dir.
/// Images are stored as float32, masks as uint8. Rewriting the same dataset
/// produces bit-identical files.
void write_dataset(const Dataset& dataset, const DatasetConfig& config,
                   const std::filesystem::path& dir);

/// Reads a dataset written by write_dataset. Image values are exactly the
/// stored float32 values. Throws ConfigError naming the offending manifest
/// field on a malformed manifest, IoError on unreadable rasters.
Dataset load_dataset(const std::filesystem::path& dir);

/// Reads just the config echo from a dataset manifest.
DatasetConfig load_dataset_config(const std::filesystem::path& dir);

}  // namespace ucmar
