#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace synclip::training {

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;  // global, starting at 1
  double loss = 0.0;
  double logit_scale = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;  // last global step of the epoch
  double logit_scale = 0.0;
  std::optional<double> val_loss;
  double i2t_r1 = 0.0;
  double i2t_r5 = 0.0;
  double t2i_r1 = 0.0;
  double t2i_r5 = 0.0;
};

/// Append-only record of a run. CSV layout:
///
///   # key = value            (provenance comments)
///   kind,epoch,step,loss,logit_scale,val_loss,i2t_r1,i2t_r5,t2i_r1,t2i_r5
///   step,1,1,4.1,14.28,,,,,
///   epoch,1,62,,14.9,3.2,0.05,0.2,0.04,0.21
///
/// Numbers use 17 significant digits; absent values are empty.
class TrainingLog {
 public:
  /// Throws std::logic_error unless steps strictly increase.
  void append(const StepRecord& record);
  void append(const EpochRecord& record);

  const std::vector<StepRecord>& steps() const noexcept { return steps_; }
  const std::vector<EpochRecord>& epochs() const noexcept { return epochs_; }

  std::string to_csv(const std::vector<std::pair<std::string, std::string>>& header = {}) const;
  void write_csv(const std::filesystem::path& path,
                 const std::vector<std::pair<std::string, std::string>>& header = {}) const;

 private:
  struct Row {
    bool is_epoch;
    std::size_t index;
  };
  std::vector<StepRecord> steps_;
  std::vector<EpochRecord> epochs_;
  std::vector<Row> order_;
};

/// "%.17g".
std::string format_double(double v);

}  // namespace synclip::training
