#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "ucmar/errors.hpp"
#include "ucmar/json_util.hpp"
#include "ucmar/model/checkpoint.hpp"

namespace ucmar {
namespace {

constexpr char kMagic[4] = {'U', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffull));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  return static_cast<std::uint64_t>(get_u32(p)) |
         (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

std::string payload_bytes(const std::vector<float>& params) {
  std::string out;
  out.reserve(params.size() * 4);
  for (float f : params) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

std::uint32_t payload_crc(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void CheckpointSet::validate() const {
  if (members.size() < 2)
    throw std::invalid_argument("CheckpointSet: need at least 2 checkpoints");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].epoch < 1)
      throw std::invalid_argument("CheckpointSet: epochs must be >= 1");
    if (i > 0 && members[i].epoch <= members[i - 1].epoch)
      throw std::invalid_argument("CheckpointSet: epochs must be strictly increasing");
    if (!(members[i].arch == members[0].arch))
      throw IncompatibleCheckpointError("CheckpointSet: members have different architectures");
  }
}

Checkpoint save_checkpoint(const Unet<float>& model, int epoch, double train_loss,
                           const std::string& rng_state_tag,
                           const std::filesystem::path& path) {
  if (epoch < 1) throw std::invalid_argument("save_checkpoint: epoch must be >= 1");

  const std::string payload = payload_bytes(model.parameters());

  Json tensors = Json::array();
  for (const auto& t : model.tensor_table())
    tensors.push_back(
        Json{{"name", t.name}, {"shape", t.shape}, {"offset", t.offset}, {"count", t.count}});
  Json manifest{{"architecture",
                 Json{{"depth", model.config().depth},
                      {"base_channels", model.config().base_channels},
                      {"grid_size", model.config().grid_size}}},
                {"epoch", epoch},
                {"train_loss", train_loss},
                {"rng_state_tag", rng_state_tag},
                {"tensors", std::move(tensors)},
                {"payload_count", model.parameters().size()},
                {"payload_crc32", payload_crc(payload)}};
  const std::string manifest_text = manifest.dump();

  std::string file;
  file.append(kMagic, 4);
  put_u32(file, kVersion);
  put_u64(file, manifest_text.size());
  file += manifest_text;
  file += payload;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(file.data(), static_cast<std::streamsize>(file.size()));
  if (!out) throw IoError("failed writing " + path.string());

  Checkpoint cp;
  cp.arch = model.config();
  cp.epoch = epoch;
  cp.train_loss = train_loss;
  cp.rng_state_tag = rng_state_tag;
  cp.parameters = model.parameters();
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ArchitectureConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (file.size() < 16 || std::memcmp(file.data(), kMagic, 4) != 0)
    throw ChecksumError(path.string() + ": not a checkpoint file");
  const auto* bytes = reinterpret_cast<const unsigned char*>(file.data());
  const std::uint32_t version = get_u32(bytes + 4);
  if (version != kVersion)
    throw IncompatibleCheckpointError(path.string() + ": unsupported checkpoint version");
  const std::uint64_t manifest_len = get_u64(bytes + 8);
  if (16 + manifest_len > file.size())
    throw ChecksumError(path.string() + ": truncated checkpoint manifest");

  Json manifest;
  try {
    manifest = Json::parse(file.substr(16, manifest_len));
  } catch (const Json::exception&) {
    throw ChecksumError(path.string() + ": corrupt checkpoint manifest");
  }
  const std::string where = path.filename().string();

  Checkpoint cp;
  const Json& arch = json_require(manifest, "architecture", where);
  cp.arch.depth = json_get<int>(arch, "depth", where);
  cp.arch.base_channels = json_get<int>(arch, "base_channels", where);
  cp.arch.grid_size = json_get<int>(arch, "grid_size", where);
  cp.epoch = json_get<int>(manifest, "epoch", where);
  cp.train_loss = json_get<double>(manifest, "train_loss", where);
  cp.rng_state_tag = json_get<std::string>(manifest, "rng_state_tag", where);
  const auto count = json_get<std::uint64_t>(manifest, "payload_count", where);
  const auto stored_crc = json_get<std::uint32_t>(manifest, "payload_crc32", where);

  if (expected && !(cp.arch == *expected))
    throw IncompatibleCheckpointError(path.string() +
                                      ": architecture does not match the expected configuration");
  cp.arch.validate();
  if (count != unet_parameter_count(cp.arch))
    throw IncompatibleCheckpointError(path.string() +
                                      ": payload_count does not match the architecture");

  const std::size_t payload_off = 16 + static_cast<std::size_t>(manifest_len);
  if (payload_off + count * 4 != file.size())
    throw ChecksumError(path.string() + ": truncated checkpoint payload");
  const std::string payload = file.substr(payload_off);
  if (payload_crc(payload) != stored_crc)
    throw ChecksumError(path.string() + ": checkpoint payload CRC mismatch");

  cp.parameters.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < count; ++i)
    cp.parameters[i] = std::bit_cast<float>(get_u32(p + i * 4));
  return cp;
}

Unet<float> materialize(const Checkpoint& checkpoint) {
  return Unet<float>(checkpoint.arch, checkpoint.parameters);
}

}  // namespace ucmar
