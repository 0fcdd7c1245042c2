#include "synclip/zeroshot/report.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <stdexcept>

namespace synclip::zeroshot {

namespace {

constexpr std::array<BaselineRow, 5> kBaselines = {{
    {"CLIP", {0.237, 0.250, 0.470}},
    {"BiomedCLIP", {0.224, 0.416, 0.540}},
    {"FLAIR", {0.545, 0.732, 0.899}},
    {"FLAIR_EK", {0.604, 0.735, 0.920}},
    {"VisionCLIP", {0.431, 0.739, 0.925}},
}};

constexpr const char* kFootnote =
    "accuracy = top-1 accuracy; baseline rows are published results on the real datasets, "
    "local rows are synthetic stand-in tasks (MESSIDOR = dr-grading, FIVES = multi-disease, "
    "REFUGE = glaucoma-screening)";

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Row {
  std::string method;
  std::array<std::optional<double>, 3> cells;
};

std::vector<Row> collect_rows(std::span<const ModelReport> reports) {
  std::vector<Row> rows;
  for (const auto& b : kBaselines) rows.push_back({std::string(b.method), {b.accuracy[0], b.accuracy[1], b.accuracy[2]}});
  for (const auto& r : reports) {
    Row row{r.model_id, {}};
    for (const auto& t : r.tasks) {
      for (std::size_t c = 0; c < kReportColumns.size(); ++c) {
        if (t.report_column == kReportColumns[c]) row.cells[c] = t.accuracy;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::span<const BaselineRow> baseline_table() { return kBaselines; }

std::string render_report(std::span<const ModelReport> reports, std::string_view format,
                          const std::vector<std::pair<std::string, std::string>>& header) {
  if (format != "csv" && format != "text") {
    throw std::invalid_argument("unknown report format '" + std::string(format) + "' (expected csv or text)");
  }
  const auto rows = collect_rows(reports);
  std::string out;
  for (const auto& [k, v] : header) out += "# " + k + " = " + v + "\n";

  if (format == "csv") {
    out += "# " + std::string(kFootnote) + "\n";
    out += "method";
    for (auto c : kReportColumns) out += "," + std::string(c);
    out += "\n";
    for (const auto& row : rows) {
      out += row.method;
      for (const auto& cell : row.cells) out += "," + (cell ? fixed3(*cell) : std::string());
      out += "\n";
    }
    return out;
  }

  std::size_t method_width = 6;
  for (const auto& row : rows) method_width = std::max(method_width, row.method.size());
  out += "Zero-shot accuracy\n\n";
  out += pad_right("method", method_width);
  for (auto c : kReportColumns) out += "  " + pad_left(std::string(c), 8);
  out += "\n" + std::string(method_width + kReportColumns.size() * 10, '-') + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == kBaselines.size()) out += std::string(method_width + kReportColumns.size() * 10, '-') + "\n";
    out += pad_right(rows[i].method, method_width);
    for (const auto& cell : rows[i].cells) out += "  " + pad_left(cell ? fixed3(*cell) : "-", 8);
    out += "\n";
  }
  out += "\n* " + std::string(kFootnote) + "\n";
  return out;
}

std::string render_task_details(const ModelReport& report) {
  std::string out = "model: " + report.model_id + "\n";
  for (const auto& t : report.tasks) {
    out += "\ntask " + t.task + " (" + t.report_column + "): n = " + std::to_string(t.n) +
           ", accuracy = " + fixed3(t.accuracy) + "\n";
    std::size_t width = 5;
    for (const auto& name : t.class_names) width = std::max(width, name.size());
    out += "  " + pad_right("class", width) + "  accuracy  confusion (predicted ->)\n";
    for (std::size_t k = 0; k < t.class_names.size(); ++k) {
      out += "  " + pad_right(t.class_names[k], width) + "  " +
             pad_left(t.per_class_accuracy[k] ? fixed3(*t.per_class_accuracy[k]) : "n/a", 8) + " ";
      for (auto v : t.confusion[k]) out += " " + pad_left(std::to_string(v), 5);
      out += "\n";
    }
  }
  return out;
}

}  // namespace synclip::zeroshot
