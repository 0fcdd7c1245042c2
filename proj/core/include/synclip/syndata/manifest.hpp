#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synclip/syndata/corpus.hpp"

namespace synclip::syndata {

inline constexpr const char* kManifestFormat = "synclip-manifest/1";

/// Provenance line written first in generated manifests:
///   {"header":{"format":..., "config_hash":..., "seed":..., "config":{key: value, ...}}}
struct ManifestHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
};

struct Manifest {
  std::optional<ManifestHeader> header;
  std::vector<PairRecord> records;
};

/// One JSON object per line:
///   {"id", "image_path", "caption", "labels": [8 x 0/1], "readability": [4 x 0..2],
///    "split", "dr_grade", "seed"}
/// Output is byte-stable for equal input.
std::string manifest_to_string(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Parses manifest text. "dr_grade" and "seed" are optional; a missing grade
/// becomes 1 for mild and 3 for severe DR. Malformed records throw
/// FormatError naming `source` and the 1-based line number.
Manifest parse_manifest(const std::string& text, const std::string& source = "manifest");
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace synclip::syndata
