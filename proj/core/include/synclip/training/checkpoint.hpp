#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "synclip/training/model.hpp"
#include "synclip/training/trainer.hpp"

namespace synclip::training {

inline constexpr char kCheckpointMagic[4] = {'V', 'C', 'L', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Base of all checkpoint read failures.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class VersionMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class TruncatedCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
/// Well-framed file whose content is inconsistent (bad header JSON, shape
/// mismatch, trailing bytes, ...).
class MalformedCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

struct CheckpointMeta {
  std::size_t epoch = 0;
  TrainConfig train;
  std::map<std::string, double> metrics;
  std::vector<std::pair<std::string, std::string>> provenance;

  bool operator==(const CheckpointMeta&) const = default;
};

/// Layout (little endian):
///
///   "VCLP"  u32 version
///   u64 header_len  header_len bytes of compact JSON
///       {"model": {"image": {...}, "text": {...}}, "vocabulary": [...],
///        "epoch": n, "train": {...}, "metrics": {...}, "provenance": {...}}
///   u64 count, then per parameter in model order:
///       u32 name_len, name, u32 rank, rank x u64 dims, f64 values
///   f64 x 3 S S image mean, S = image input_size
///
/// Serialization is a pure function of the inputs.
std::string serialize_checkpoint(const ClipModel& model, const CheckpointMeta& meta);
void save_checkpoint(const std::filesystem::path& path, const ClipModel& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  ClipModel model;
  CheckpointMeta meta;
};

LoadedCheckpoint deserialize_checkpoint(const std::string& bytes);
/// Throws BadMagicError, VersionMismatchError, TruncatedCheckpointError or
/// MalformedCheckpointError; CheckpointError if the file cannot be read.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace synclip::training
