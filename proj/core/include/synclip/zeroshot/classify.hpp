#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synclip/autodiff/tensor.hpp"
#include "synclip/syndata/labels.hpp"
#include "synclip/training/model.hpp"
#include "synclip/zeroshot/tasks.hpp"

namespace synclip::zeroshot {

/// [C, d]: per class, the mean of its unit-norm prompt embeddings,
/// re-normalized. Throws std::invalid_argument naming the class when a
/// prompt does not fit in max_seq_len.
autodiff::Tensor build_class_embeddings(const training::ClipModel& model, const ZeroShotTask& task);

/// argmax_c <image_emb[n], class_emb[c]>, ties to the lowest index.
/// image_emb [N, d], class_emb [C, d] with unit-norm rows (1e-6).
std::vector<std::size_t> classify(const autodiff::Tensor& image_emb, const autodiff::Tensor& class_emb);

/// Encodes images [N, 3, S, S] and classifies them.
std::vector<std::size_t> classify_images(const training::ClipModel& model, const autodiff::Tensor& images,
                                         const autodiff::Tensor& class_emb);

struct TaskResult {
  std::string task;
  std::string report_column;
  std::vector<std::string> class_names;
  std::size_t n = 0;
  double accuracy = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;  // nullopt when a class has no samples
  std::vector<std::vector<std::size_t>> confusion;         // [true][predicted]
};

/// Counts predictions against labels (same length, indices < classes).
TaskResult score_predictions(const ZeroShotTask& task, std::span<const std::size_t> labels,
                             std::span<const std::size_t> predictions);

struct EvalSample {
  std::size_t id = 0;
  autodiff::Tensor image;  // [3, S, S]
  syndata::Labels labels;
};

struct EvalOptions {
  /// Keep the first k samples of every class (in input order), where k is
  /// the smallest non-zero class count, so a constant predictor scores 1/C.
  bool balance = true;
  std::size_t batch = 64;
};

/// Indices into `samples` that `task` uses, with their class labels.
struct TaskSelection {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> labels;
};
TaskSelection select_samples(const ZeroShotTask& task, std::span<const EvalSample> samples, bool balance);

/// Throws std::invalid_argument when no sample maps to a class.
TaskResult evaluate_task(const training::ClipModel& model, const ZeroShotTask& task,
                         std::span<const EvalSample> samples, const EvalOptions& options = {});

}  // namespace synclip::zeroshot
