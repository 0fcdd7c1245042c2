#include "synclip/training/training_log.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace synclip::training {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void TrainingLog::append(const StepRecord& record) {
  if (!steps_.empty() && record.step <= steps_.back().step) {
    throw std::logic_error("TrainingLog: step " + std::to_string(record.step) + " does not follow " +
                           std::to_string(steps_.back().step));
  }
  order_.push_back({false, steps_.size()});
  steps_.push_back(record);
}

void TrainingLog::append(const EpochRecord& record) {
  if (!epochs_.empty() && record.epoch <= epochs_.back().epoch) {
    throw std::logic_error("TrainingLog: epoch " + std::to_string(record.epoch) + " does not follow " +
                           std::to_string(epochs_.back().epoch));
  }
  order_.push_back({true, epochs_.size()});
  epochs_.push_back(record);
}

std::string TrainingLog::to_csv(const std::vector<std::pair<std::string, std::string>>& header) const {
  std::string out;
  for (const auto& [k, v] : header) out += "# " + k + " = " + v + "\n";
  out += "kind,epoch,step,loss,logit_scale,val_loss,i2t_r1,i2t_r5,t2i_r1,t2i_r5\n";
  for (const auto& row : order_) {
    if (!row.is_epoch) {
      const auto& s = steps_[row.index];
      out += "step," + std::to_string(s.epoch) + "," + std::to_string(s.step) + "," + format_double(s.loss) + "," +
             format_double(s.logit_scale) + ",,,,,\n";
    } else {
      const auto& e = epochs_[row.index];
      out += "epoch," + std::to_string(e.epoch) + "," + std::to_string(e.step) + ",," + format_double(e.logit_scale) +
             "," + (e.val_loss ? format_double(*e.val_loss) : std::string()) + "," + format_double(e.i2t_r1) + "," +
             format_double(e.i2t_r5) + "," + format_double(e.t2i_r1) + "," + format_double(e.t2i_r5) + "\n";
    }
  }
  return out;
}

void TrainingLog::write_csv(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, std::string>>& header) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write training log " + path.string());
  const std::string text = to_csv(header);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing training log " + path.string());
}

}  // namespace synclip::training
