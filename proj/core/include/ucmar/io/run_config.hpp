#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "ucmar/sim/dataset.hpp"
#include "ucmar/train/trainer.hpp"

namespace ucmar {

/// The single JSON document driving synth/train/eval/viz. Every field has a
/// default; unknown keys are rejected with the offending dotted path; the
/// resolved form echoes every default explicitly.
struct RunConfig {
  DatasetConfig dataset;               // grid/counts/seed + scan geometry
  std::string dataset_dir = "dataset"; // where cmd_synth writes, others read
  TrainConfig train;                   // optimizer, schedule, architecture

  /// Strict parse. Throws ConfigError naming the field on unknown keys,
  /// wrong types, or invalid values.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::filesystem::path& path);

  /// Full echo with every default filled in (stable key order).
  nlohmann::json resolved() const;

  /// FNV-1a 64-bit hash of the resolved document; names run directories.
  std::string hash() const;
};

std::string fnv1a64_hex(std::string_view text);

}  // namespace ucmar
