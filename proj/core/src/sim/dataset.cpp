#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ucmar/json_util.hpp"
#include "ucmar/raster_io.hpp"
#include "ucmar/rng.hpp"
#include "ucmar/sim/dataset.hpp"

namespace ucmar {
namespace {

// Stream tags keeping the per-sample seeds of the two splits disjoint.
constexpr std::uint64_t kTrainPhantom = 0x1000000ull;
constexpr std::uint64_t kTrainMask = 0x2000000ull;
constexpr std::uint64_t kTrainPair = 0x3000000ull;
constexpr std::uint64_t kTestPhantom = 0x4000000ull;
constexpr std::uint64_t kTestMask = 0x5000000ull;
constexpr std::uint64_t kTestPair = 0x6000000ull;

std::string split_id(const char* split, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%03d", split, index);
  return buf;
}

std::vector<PairedSample> synthesize_split(const DatasetConfig& config, const char* split,
                                           int count, std::uint64_t phantom_tag,
                                           std::uint64_t mask_tag, std::uint64_t pair_tag) {
  std::vector<PairedSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t mask_seed = Rng::derive(config.seed, mask_tag + i);
    Rng pick(mask_seed);
    const int implants = static_cast<int>(pick.uniform_int(1, 3));
    const Image clean =
        generate_phantom(Rng::derive(config.seed, phantom_tag + i), config.grid_size);
    const MetalMask mask = generate_metal_mask(mask_seed, config.grid_size, implants);
    PairedSample sample = synthesize_pair(clean, mask, config.geometry,
                                          Rng::derive(config.seed, pair_tag + i));
    sample.sample_id = split_id(split, i);
    out.push_back(std::move(sample));
  }
  return out;
}

Json geometry_to_json(const ScanGeometry& g, int grid_size) {
  return Json{{"n_angles", g.n_angles},
              {"n_detectors", g.detectors_for(grid_size)},
              {"beam_hardening", {g.beam_hardening_c1, g.beam_hardening_c2, g.beam_hardening_c3}},
              {"photon_count", g.photon_count},
              {"poisson_noise", g.poisson_noise},
              {"metal_attenuation", g.metal_attenuation},
              {"attenuation_scale", g.attenuation_scale},
              {"ray_step", g.ray_step}};
}

ScanGeometry geometry_from_json(const Json& j, const std::string& where) {
  ScanGeometry g;
  g.n_angles = json_get<int>(j, "n_angles", where);
  g.n_detectors = json_get<int>(j, "n_detectors", where);
  const Json& coeffs = json_require(j, "beam_hardening", where);
  if (!coeffs.is_array() || coeffs.size() != 3)
    throw ConfigError(where + ": field 'beam_hardening' must be an array of 3 numbers");
  g.beam_hardening_c1 = coeffs[0].get<double>();
  g.beam_hardening_c2 = coeffs[1].get<double>();
  g.beam_hardening_c3 = coeffs[2].get<double>();
  g.photon_count = json_get<double>(j, "photon_count", where);
  g.poisson_noise = json_get<bool>(j, "poisson_noise", where);
  g.metal_attenuation = json_get<double>(j, "metal_attenuation", where);
  g.attenuation_scale = json_get<double>(j, "attenuation_scale", where);
  g.ray_step = json_get<double>(j, "ray_step", where);
  return g;
}

std::filesystem::path sample_path(const std::filesystem::path& dir, const std::string& id,
                                  const char* role) {
  return dir / "samples" / (id + "." + role + ".ucmr");
}

std::vector<PairedSample> load_split(const Json& manifest, const char* split,
                                     const std::filesystem::path& dir, int grid_size) {
  const std::string where = "manifest.json";
  const Json& list = json_require(manifest, split, where);
  if (!list.is_array()) throw ConfigError(where + ": field '" + std::string(split) + "' must be an array");
  std::vector<PairedSample> out;
  out.reserve(list.size());
  for (const Json& entry : list) {
    PairedSample s;
    s.sample_id = json_get<std::string>(entry, "id", where);
    s.corrupted = read_raster_f32(sample_path(dir, s.sample_id, "corrupted"));
    s.clean = read_raster_f32(sample_path(dir, s.sample_id, "clean"));
    s.mask.mask = read_raster_u8(sample_path(dir, s.sample_id, "mask"));
    s.mask.implant_count = json_get<int>(entry, "implants", where);
    if (s.corrupted.rows() != grid_size || !s.corrupted.square() ||
        !s.clean.same_shape(s.corrupted) || s.mask.mask.rows() != grid_size ||
        s.mask.mask.cols() != grid_size)
      throw ConfigError(where + ": sample '" + s.sample_id + "' rasters disagree with grid_size");
    out.push_back(std::move(s));
  }
  return out;
}

Json read_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json manifest;
  try {
    in >> manifest;
  } catch (const Json::exception& e) {
    throw ConfigError("manifest.json: not valid JSON (" + std::string(e.what()) + ")");
  }
  const std::string format = json_get<std::string>(manifest, "format", "manifest.json");
  if (format != "ucmar-dataset")
    throw ConfigError("manifest.json: field 'format' must be 'ucmar-dataset'");
  return manifest;
}

}  // namespace

void DatasetConfig::validate() const {
  if (grid_size < 32) throw ConfigError("DatasetConfig: grid_size must be >= 32");
  if (train_count < 1) throw ConfigError("DatasetConfig: train_count must be >= 1");
  if (test_count < 1) throw ConfigError("DatasetConfig: test_count must be >= 1");
  geometry.validate();
}

Dataset synthesize_dataset(const DatasetConfig& config) {
  config.validate();
  Dataset d;
  d.grid_size = config.grid_size;
  d.train = synthesize_split(config, "train", config.train_count, kTrainPhantom, kTrainMask,
                             kTrainPair);
  d.test =
      synthesize_split(config, "test", config.test_count, kTestPhantom, kTestMask, kTestPair);
  return d;
}

void write_dataset(const Dataset& dataset, const DatasetConfig& config,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "samples");

  Json manifest;
  manifest["format"] = "ucmar-dataset";
  manifest["version"] = 1;
  manifest["grid_size"] = dataset.grid_size;
  manifest["seed"] = config.seed;
  manifest["train_count"] = static_cast<int>(dataset.train.size());
  manifest["test_count"] = static_cast<int>(dataset.test.size());
  manifest["geometry"] = geometry_to_json(config.geometry, dataset.grid_size);

  for (const char* split : {"train", "test"}) {
    const auto& samples = (std::string(split) == "train") ? dataset.train : dataset.test;
    Json list = Json::array();
    for (const PairedSample& s : samples) {
      write_raster_f32(sample_path(dir, s.sample_id, "corrupted"), s.corrupted);
      write_raster_f32(sample_path(dir, s.sample_id, "clean"), s.clean);
      write_raster_u8(sample_path(dir, s.sample_id, "mask"), s.mask.mask);
      list.push_back(Json{{"id", s.sample_id}, {"implants", s.mask.implant_count}});
    }
    manifest[split] = std::move(list);
  }

  const std::filesystem::path path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const Json manifest = read_manifest(dir);
  Dataset d;
  d.grid_size = json_get<int>(manifest, "grid_size", "manifest.json");
  d.train = load_split(manifest, "train", dir, d.grid_size);
  d.test = load_split(manifest, "test", dir, d.grid_size);
  const int train_count = json_get<int>(manifest, "train_count", "manifest.json");
  const int test_count = json_get<int>(manifest, "test_count", "manifest.json");
  if (static_cast<int>(d.train.size()) != train_count ||
      static_cast<int>(d.test.size()) != test_count)
    throw ConfigError("manifest.json: sample lists disagree with train_count/test_count");
  return d;
}

DatasetConfig load_dataset_config(const std::filesystem::path& dir) {
  const Json manifest = read_manifest(dir);
  DatasetConfig config;
  config.grid_size = json_get<int>(manifest, "grid_size", "manifest.json");
  config.train_count = json_get<int>(manifest, "train_count", "manifest.json");
  config.test_count = json_get<int>(manifest, "test_count", "manifest.json");
  config.seed = json_get<std::uint64_t>(manifest, "seed", "manifest.json");
  config.geometry =
      geometry_from_json(json_require(manifest, "geometry", "manifest.json"), "manifest.json");
  return config;
}

}  // namespace ucmar
