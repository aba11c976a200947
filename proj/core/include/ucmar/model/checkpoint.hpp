#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ucmar/model/unet.hpp"

namespace ucmar {

/// One saved training state: a parameter snapshot plus epoch metadata.
/// Immutable after creation; safe to share across threads.
struct Checkpoint {
  ArchitectureConfig arch;
  int epoch = 1;  // 1-based count of completed epochs
  double train_loss = 0.0;
  std::string rng_state_tag;
  std::vector<float> parameters;
};

/// The early-epoch ensemble: checkpoints with strictly increasing epochs.
struct CheckpointSet {
  std::vector<Checkpoint> members;

  int size() const { return static_cast<int>(members.size()); }

  /// Enforces >= 2 members, strictly increasing epochs, one architecture.
  void validate() const;
};

/// Serializes the model to path and returns the in-memory record.
/// File layout: magic "UCKP", u32 version, u64 manifest length, JSON manifest
/// (architecture, epoch, train_loss, rng_state_tag, tensor table, payload
/// CRC32), then the parameters as contiguous little-endian float32.
Checkpoint save_checkpoint(const Unet<float>& model, int epoch, double train_loss,
                           const std::string& rng_state_tag,
                           const std::filesystem::path& path);

/// Reads a checkpoint file. Throws ChecksumError on a corrupt or truncated
/// file, IncompatibleCheckpointError when `expected` is given and the stored
/// architecture differs.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ArchitectureConfig>& expected = std::nullopt);

/// Rebuilds the runnable model from a checkpoint (bit-exact parameters).
Unet<float> materialize(const Checkpoint& checkpoint);

}  // namespace ucmar
