#pragma once

#include <stdexcept>
#include <string>

namespace ucmar {

/// Validation failure in a config file or on-disk manifest. The message names
/// the offending field/key path so CLI diagnostics stay actionable.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numeric input outside its documented domain (NaN raster, uncertainty
/// weights outside [0,1], ...).
class InvalidInputError : public std::runtime_error {
public:
  explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Stored payload does not match its recorded checksum.
class ChecksumError : public std::runtime_error {
public:
  explicit ChecksumError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Checkpoint architecture does not match what the caller declared.
class IncompatibleCheckpointError : public std::runtime_error {
public:
  explicit IncompatibleCheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss; the run aborts, checkpoints written so
/// far stay on disk.
class TrainingDivergedError : public std::runtime_error {
public:
  explicit TrainingDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An uncertainty store is missing the map for a requested sample.
class IncompleteStoreError : public std::runtime_error {
public:
  explicit IncompleteStoreError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / serialization failure.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ucmar
