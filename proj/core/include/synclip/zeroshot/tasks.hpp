#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synclip/syndata/labels.hpp"

namespace synclip::zeroshot {

struct ClassSpec {
  std::string name;
  std::vector<std::string> prompts;
};

/// Maps a label vector to a class index, or nullopt to exclude the sample.
using LabelRule = std::function<std::optional<std::size_t>(const syndata::Labels&)>;

struct ZeroShotTask {
  std::string name;
  std::string report_column;  // external dataset this task stands in for
  std::vector<ClassSpec> classes;
  LabelRule label_of;

  /// Throws std::invalid_argument unless there are >= 2 classes, each with
  /// at least one prompt.
  void validate() const;
};

class UnknownTaskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Built-in tasks, in report order:
///
///   dr-grading          MESSIDOR  grade 0..4; images with any non-DR finding are excluded
///   multi-disease       FIVES     normal, diabetic retinopathy, glaucoma, age-related
///                                 degeneration; only images with exactly that finding
///                                 (or none) are used
///   glaucoma-screening  REFUGE    normal (no finding) vs glaucoma (flag set)
///
/// Prompts reuse the caption grammar: the normal templates for the normal
/// class and "<opening> with <phrase>" otherwise.
const std::vector<ZeroShotTask>& builtin_tasks();
std::vector<std::string> builtin_task_names();
/// Throws UnknownTaskError listing the valid names.
const ZeroShotTask& find_task(const std::string& name);

}  // namespace synclip::zeroshot
