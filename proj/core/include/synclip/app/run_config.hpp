#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synclip/syndata/corpus.hpp"
#include "synclip/training/model.hpp"
#include "synclip/training/trainer.hpp"

namespace synclip::app {

/// Invalid configuration text, key or value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::uint64_t seed = 20240501;
  std::size_t threads = 1;

  std::string corpus_dir = "corpus";
  std::string checkpoint = "checkpoint.vclp";
  std::string train_log = "train_log.csv";
  std::string report_dir = "report";

  syndata::CorpusConfig corpus;
  std::string image_source = "render";  // "render" or "files"
  training::ModelConfig model;
  training::TrainConfig train;

  std::vector<std::string> eval_tasks = {"dr-grading", "multi-disease", "glaucoma-screening"};
  std::string eval_split = "test";  // train, val, test or all
  bool eval_balance = true;

  /// Copies seed and image size into the module configs and checks every
  /// value; throws ConfigError.
  void finalize();
};

struct ConfigKeyInfo {
  std::string key;
  std::string description;
  bool is_path;
};

/// Every accepted key in file order, with its documentation.
const std::vector<ConfigKeyInfo>& config_keys();

/// Sets one key from its text form. Throws ConfigError for unknown keys or
/// unparsable values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);

/// Parses "key = value" lines; '#' starts a comment, blank lines are
/// ignored. Errors name `source` and the line number. The result is not
/// finalized, so overrides can still be layered on top.
RunConfig parse_run_config(std::string_view text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// All keys and their current values, in config_keys() order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config, bool include_paths = true);

/// A commented config file listing every key with its current value.
std::string render_run_config(const RunConfig& config);

/// FNV-1a 64 over "key=value\n" for every non-path key, as 16 hex digits.
/// Paths are excluded so the same experiment written to different
/// directories hashes identically.
std::string config_hash(const RunConfig& config);

/// config_hash, seed and every non-path entry: the provenance block written
/// into output headers.
std::vector<std::pair<std::string, std::string>> provenance(const RunConfig& config);

}  // namespace synclip::app
