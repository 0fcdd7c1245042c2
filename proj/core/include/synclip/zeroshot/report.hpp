#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synclip/zeroshot/classify.hpp"

namespace synclip::zeroshot {

inline constexpr std::array<std::string_view, 3> kReportColumns = {"MESSIDOR", "FIVES", "REFUGE"};

/// Published zero-shot accuracies of reference methods on the real datasets.
struct BaselineRow {
  std::string_view method;
  std::array<double, 3> accuracy;  // kReportColumns order
};

std::span<const BaselineRow> baseline_table();

struct ModelReport {
  std::string model_id;
  std::vector<TaskResult> tasks;
};

/// "csv" or "text"; anything else throws std::invalid_argument.
///
/// Both formats list the baseline rows first, then one row per model whose
/// cells hold the accuracy of the task mapped to that column (blank when
/// not evaluated). Values use three decimals. `header` lines are emitted
/// first as "# key = value" comments.
std::string render_report(std::span<const ModelReport> reports, std::string_view format,
                          const std::vector<std::pair<std::string, std::string>>& header = {});

/// Per-task sample count, accuracy, per-class accuracy and confusion matrix.
std::string render_task_details(const ModelReport& report);

}  // namespace synclip::zeroshot
