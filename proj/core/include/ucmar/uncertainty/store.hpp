#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ucmar/uncertainty/uncertainty.hpp"

namespace ucmar {

/// Persisted per-sample uncertainty maps: one raster file per sample id plus
/// uncertainty_manifest.json (source checkpoint epochs, std divisor,
/// normalization scope). Built once after phase-1 training, then read-only.
class UncertaintyStore {
 public:
  UncertaintyStore() = default;

  /// Starts a new store under dir. Maps are persisted by put(); call
  /// finalize() to write the manifest once every sample is in.
  static UncertaintyStore create(const std::filesystem::path& dir,
                                 std::vector<int> source_epochs, StdDivisor divisor);

  /// Opens a finalized store, loading every map into memory.
  static UncertaintyStore open(const std::filesystem::path& dir);

  void put(const UncertaintyMap& map);
  void finalize();

  bool contains(const std::string& sample_id) const;

  /// Throws IncompleteStoreError when the sample has no stored map.
  const UncertaintyMap& get(const std::string& sample_id) const;

  std::size_t size() const { return maps_.size(); }
  const std::vector<int>& source_epochs() const { return source_epochs_; }
  StdDivisor divisor() const { return divisor_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::vector<std::string> sample_ids() const;

 private:
  std::filesystem::path dir_;
  std::vector<int> source_epochs_;
  StdDivisor divisor_ = StdDivisor::population;
  std::map<std::string, UncertaintyMap> maps_;
};

}  // namespace ucmar
