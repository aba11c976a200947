#include <cstdio>
#include <fstream>
#include <initializer_list>

#include "ucmar/io/run_config.hpp"
#include "ucmar/json_util.hpp"

namespace ucmar {
namespace {

const char* kWhere = "config";

void reject_unknown(const Json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError(std::string(kWhere) + ": '" + prefix + "' must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed)
      if (it.key() == name) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string(kWhere) + ": unknown field '" +
                        (prefix.empty() ? it.key() : prefix + "." + it.key()) + "'");
  }
}

template <typename T>
void maybe(const Json& obj, const char* key, const std::string& prefix, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(kWhere) + ": field '" + prefix + "." + key +
                      "' has the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  if (!doc.is_object()) throw ConfigError(std::string(kWhere) + ": document must be a JSON object");
  reject_unknown(doc, "", {"dataset", "geometry", "model", "train", "ensemble"});

  if (auto it = doc.find("dataset"); it != doc.end()) {
    reject_unknown(*it, "dataset",
                   {"grid_size", "train_count", "test_count", "seed", "dir"});
    maybe(*it, "grid_size", "dataset", cfg.dataset.grid_size);
    maybe(*it, "train_count", "dataset", cfg.dataset.train_count);
    maybe(*it, "test_count", "dataset", cfg.dataset.test_count);
    maybe(*it, "seed", "dataset", cfg.dataset.seed);
    maybe(*it, "dir", "dataset", cfg.dataset_dir);
  }

  if (auto it = doc.find("geometry"); it != doc.end()) {
    reject_unknown(*it, "geometry",
                   {"n_angles", "n_detectors", "beam_hardening", "photon_count",
                    "poisson_noise", "metal_attenuation", "attenuation_scale", "ray_step"});
    ScanGeometry& g = cfg.dataset.geometry;
    maybe(*it, "n_angles", "geometry", g.n_angles);
    maybe(*it, "n_detectors", "geometry", g.n_detectors);
    if (auto bh = it->find("beam_hardening"); bh != it->end()) {
      if (!bh->is_array() || bh->size() != 3)
        throw ConfigError(std::string(kWhere) +
                          ": field 'geometry.beam_hardening' must be an array of 3 numbers");
      g.beam_hardening_c1 = (*bh)[0].get<double>();
      g.beam_hardening_c2 = (*bh)[1].get<double>();
      g.beam_hardening_c3 = (*bh)[2].get<double>();
    }
    maybe(*it, "photon_count", "geometry", g.photon_count);
    maybe(*it, "poisson_noise", "geometry", g.poisson_noise);
    maybe(*it, "metal_attenuation", "geometry", g.metal_attenuation);
    maybe(*it, "attenuation_scale", "geometry", g.attenuation_scale);
    maybe(*it, "ray_step", "geometry", g.ray_step);
  }

  if (auto it = doc.find("model"); it != doc.end()) {
    reject_unknown(*it, "model", {"depth", "base_channels"});
    maybe(*it, "depth", "model", cfg.train.depth);
    maybe(*it, "base_channels", "model", cfg.train.base_channels);
  }

  if (auto it = doc.find("train"); it != doc.end()) {
    reject_unknown(*it, "train",
                   {"batch_size", "base_lr", "min_lr", "total_epochs", "anneal_period",
                    "phase1_epochs", "checkpoint_epochs", "seed", "optimizer", "adam_betas",
                    "retrain_mode", "exclude_metal"});
    TrainConfig& t = cfg.train;
    maybe(*it, "batch_size", "train", t.batch_size);
    maybe(*it, "base_lr", "train", t.base_lr);
    maybe(*it, "min_lr", "train", t.min_lr);
    maybe(*it, "total_epochs", "train", t.total_epochs);
    maybe(*it, "anneal_period", "train", t.anneal_period);
    maybe(*it, "phase1_epochs", "train", t.phase1_epochs);
    maybe(*it, "checkpoint_epochs", "train", t.checkpoint_epochs);
    maybe(*it, "seed", "train", t.seed);
    maybe(*it, "optimizer", "train", t.optimizer);
    if (auto betas = it->find("adam_betas"); betas != it->end()) {
      if (!betas->is_array() || betas->size() != 2)
        throw ConfigError(std::string(kWhere) +
                          ": field 'train.adam_betas' must be an array of 2 numbers");
      t.adam_beta1 = (*betas)[0].get<double>();
      t.adam_beta2 = (*betas)[1].get<double>();
    }
    if (auto rm = it->find("retrain_mode"); rm != it->end()) {
      const std::string mode = rm->get<std::string>();
      if (mode == "from_scratch")
        t.retrain_mode = TrainConfig::RetrainMode::from_scratch;
      else if (mode == "continue")
        t.retrain_mode = TrainConfig::RetrainMode::continue_last;
      else
        throw ConfigError(std::string(kWhere) +
                          ": field 'train.retrain_mode' must be 'from_scratch' or 'continue'");
    }
    maybe(*it, "exclude_metal", "train", t.exclude_metal);
  }

  if (auto it = doc.find("ensemble"); it != doc.end()) {
    reject_unknown(*it, "ensemble", {"std_divisor"});
    if (auto sd = it->find("std_divisor"); sd != it->end()) {
      const std::string div = sd->get<std::string>();
      if (div == "population")
        cfg.train.std_divisor = StdDivisor::population;
      else if (div == "sample")
        cfg.train.std_divisor = StdDivisor::sample;
      else
        throw ConfigError(std::string(kWhere) +
                          ": field 'ensemble.std_divisor' must be 'population' or 'sample'");
    }
  }

  cfg.train.grid_size = cfg.dataset.grid_size;
  cfg.dataset.validate();
  cfg.train.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": not valid JSON (" + std::string(e.what()) + ")");
  }
  return from_json(doc);
}

nlohmann::json RunConfig::resolved() const {
  const ScanGeometry& g = dataset.geometry;
  return Json{
      {"dataset",
       Json{{"grid_size", dataset.grid_size},
            {"train_count", dataset.train_count},
            {"test_count", dataset.test_count},
            {"seed", dataset.seed},
            {"dir", dataset_dir}}},
      {"geometry",
       Json{{"n_angles", g.n_angles},
            {"n_detectors", g.n_detectors},
            {"beam_hardening", {g.beam_hardening_c1, g.beam_hardening_c2, g.beam_hardening_c3}},
            {"photon_count", g.photon_count},
            {"poisson_noise", g.poisson_noise},
            {"metal_attenuation", g.metal_attenuation},
            {"attenuation_scale", g.attenuation_scale},
            {"ray_step", g.ray_step}}},
      {"model", Json{{"depth", train.depth}, {"base_channels", train.base_channels}}},
      {"train",
       Json{{"batch_size", train.batch_size},
            {"base_lr", train.base_lr},
            {"min_lr", train.min_lr},
            {"total_epochs", train.total_epochs},
            {"anneal_period", train.anneal_period},
            {"phase1_epochs", train.phase1_epochs},
            {"checkpoint_epochs", train.checkpoint_epochs},
            {"seed", train.seed},
            {"optimizer", train.optimizer},
            {"adam_betas", {train.adam_beta1, train.adam_beta2}},
            {"retrain_mode", train.retrain_mode == TrainConfig::RetrainMode::from_scratch
                                 ? "from_scratch"
                                 : "continue"},
            {"exclude_metal", train.exclude_metal}}},
      {"ensemble",
       Json{{"std_divisor",
             train.std_divisor == StdDivisor::population ? "population" : "sample"}}}};
}

std::string fnv1a64_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::hash() const { return fnv1a64_hex(resolved().dump()); }

}  // namespace ucmar
