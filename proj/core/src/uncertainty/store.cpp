#include <fstream>

#include "ucmar/errors.hpp"
#include "ucmar/json_util.hpp"
#include "ucmar/raster_io.hpp"
#include "ucmar/uncertainty/store.hpp"

namespace ucmar {
namespace {

const char* kManifestName = "uncertainty_manifest.json";

std::filesystem::path map_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / "maps" / (id + ".ucmr");
}

std::string divisor_name(StdDivisor d) {
  return d == StdDivisor::population ? "population" : "sample";
}

StdDivisor divisor_from_name(const std::string& name, const std::string& where) {
  if (name == "population") return StdDivisor::population;
  if (name == "sample") return StdDivisor::sample;
  throw ConfigError(where + ": field 'std_divisor' must be 'population' or 'sample'");
}

}  // namespace

UncertaintyStore UncertaintyStore::create(const std::filesystem::path& dir,
                                          std::vector<int> source_epochs, StdDivisor divisor) {
  UncertaintyStore store;
  store.dir_ = dir;
  store.source_epochs_ = std::move(source_epochs);
  store.divisor_ = divisor;
  std::filesystem::create_directories(dir / "maps");
  return store;
}

void UncertaintyStore::put(const UncertaintyMap& map) {
  if (map.source_sample_id.empty())
    throw std::invalid_argument("UncertaintyStore: map has no sample id");
  write_raster_f32(map_path(dir_, map.source_sample_id), map.values);
  UncertaintyMap stored = map;
  // Training reads maps back from disk, so keep the in-memory copy identical
  // to the float32 round trip.
  stored.values = quantize_f32(map.values);
  maps_[map.source_sample_id] = std::move(stored);
}

void UncertaintyStore::finalize() {
  Json manifest;
  manifest["format"] = "ucmar-uncertainty";
  manifest["version"] = 1;
  manifest["source_epochs"] = source_epochs_;
  manifest["std_divisor"] = divisor_name(divisor_);
  manifest["normalization"] = "per-image-minmax";
  Json ids = Json::array();
  for (const auto& [id, map] : maps_) ids.push_back(id);
  manifest["samples"] = std::move(ids);

  const std::filesystem::path path = dir_ / kManifestName;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

UncertaintyStore UncertaintyStore::open(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json manifest;
  try {
    in >> manifest;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(kManifestName) + ": not valid JSON (" + e.what() + ")");
  }
  const std::string where = kManifestName;
  if (json_get<std::string>(manifest, "format", where) != "ucmar-uncertainty")
    throw ConfigError(where + ": field 'format' must be 'ucmar-uncertainty'");

  UncertaintyStore store;
  store.dir_ = dir;
  store.source_epochs_ = json_get<std::vector<int>>(manifest, "source_epochs", where);
  store.divisor_ = divisor_from_name(json_get<std::string>(manifest, "std_divisor", where), where);
  for (const std::string& id :
       json_get<std::vector<std::string>>(manifest, "samples", where)) {
    UncertaintyMap map;
    map.source_sample_id = id;
    map.source_epochs = store.source_epochs_;
    map.values = read_raster_f32(map_path(dir, id));
    store.maps_[id] = std::move(map);
  }
  return store;
}

bool UncertaintyStore::contains(const std::string& sample_id) const {
  return maps_.count(sample_id) != 0;
}

const UncertaintyMap& UncertaintyStore::get(const std::string& sample_id) const {
  auto it = maps_.find(sample_id);
  if (it == maps_.end())
    throw IncompleteStoreError("uncertainty store has no map for sample '" + sample_id + "'");
  return it->second;
}

std::vector<std::string> UncertaintyStore::sample_ids() const {
  std::vector<std::string> ids;
  ids.reserve(maps_.size());
  for (const auto& [id, map] : maps_) ids.push_back(id);
  return ids;
}

}  // namespace ucmar
