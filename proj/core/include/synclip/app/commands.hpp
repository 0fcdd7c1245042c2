#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synclip/app/run_config.hpp"

namespace synclip::app {

/// A problem the user can fix: missing inputs, bad arguments, corrupt files.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

/// 2 for configuration, input and file-format errors, 1 for anything else.
int exit_code_for(const std::exception& e);

std::filesystem::path manifest_path(const RunConfig& config);

/// Writes manifest.jsonl and images/ under config.corpus_dir.
void cmd_gen_data(const RunConfig& config, std::ostream& out);

/// Trains on the train split and writes the checkpoint and training log.
/// With `init_only` the freshly initialized model is saved and nothing is
/// trained.
void cmd_train(const RunConfig& config, bool init_only, std::ostream& out);

struct EvalInput {
  std::string checkpoint;
  /// External manifest (file or directory); empty means the corpus split.
  std::string dataset;
};

/// Zero-shot evaluation. Writes report.csv, report.txt and details.txt into
/// config.report_dir and prints the text report.
void cmd_eval(const RunConfig& config, const EvalInput& input, std::ostream& out);

struct EmbedInput {
  std::string checkpoint;
  std::string dataset;  // manifest file or directory; empty means the corpus
  std::string out;      // empty means <report_dir>/embeddings.csv
  std::string modality = "image";  // image or text
};

/// One CSV row per manifest record: id followed by the embedding.
void cmd_embed(const RunConfig& config, const EmbedInput& input, std::ostream& out);

/// Full command line: parses argv, runs a subcommand, reports errors on
/// `err` and returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synclip::app
