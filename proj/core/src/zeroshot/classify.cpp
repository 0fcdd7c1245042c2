#include "synclip/zeroshot/classify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "synclip/autodiff/ops.hpp"
#include "synclip/encoders/vocabulary.hpp"

namespace synclip::zeroshot {

using autodiff::Tensor;
namespace ops = autodiff::ops;

namespace {

void check_unit_rows(const Tensor& m, const char* what) {
  const std::size_t d = m.dim(1);
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += m[i * d + k] * m[i * d + k];
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      throw autodiff::DomainError(std::string("classify: ") + what + " row " + std::to_string(i) + " is not unit norm");
    }
  }
}

}  // namespace

Tensor build_class_embeddings(const training::ClipModel& model, const ZeroShotTask& task) {
  task.validate();
  const std::size_t max_len = model.config().text.max_seq_len;
  std::vector<Tensor> rows;
  for (const auto& cls : task.classes) {
    for (const auto& p : cls.prompts) {
      const std::size_t words = encoders::split_words(p).size();
      if (words + 2 > max_len) {
        throw std::invalid_argument("task " + task.name + ", class '" + cls.name + "': prompt of " +
                                    std::to_string(words) + " words exceeds max_seq_len " + std::to_string(max_len));
      }
    }
    const Tensor emb = model.encode_texts(cls.prompts).detached();
    rows.push_back(ops::reshape(ops::mean(emb, 0), {1, emb.dim(1)}));
  }
  return ops::l2_normalize(ops::concat(rows, 0), -1).detached();
}

std::vector<std::size_t> classify(const Tensor& image_emb, const Tensor& class_emb) {
  if (image_emb.rank() != 2 || class_emb.rank() != 2 || image_emb.dim(1) != class_emb.dim(1)) {
    throw autodiff::ShapeError("classify", image_emb.shape(), class_emb.shape(), "expected [N, d] and [C, d]");
  }
  check_unit_rows(class_emb, "class embedding");
  const Tensor sim = ops::matmul(image_emb.detached(), ops::transpose(class_emb.detached()));
  const std::size_t n = image_emb.dim(0), c = class_emb.dim(0);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (sim[i * c + k] > sim[i * c + best]) best = k;
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::size_t> classify_images(const training::ClipModel& model, const Tensor& images, const Tensor& class_emb) {
  return classify(model.encode_images(images), class_emb);
}

TaskResult score_predictions(const ZeroShotTask& task, std::span<const std::size_t> labels,
                             std::span<const std::size_t> predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("score_predictions: " + std::to_string(labels.size()) + " labels but " +
                                std::to_string(predictions.size()) + " predictions");
  }
  const std::size_t c = task.classes.size();
  TaskResult r;
  r.task = task.name;
  r.report_column = task.report_column;
  for (const auto& cls : task.classes) r.class_names.push_back(cls.name);
  r.n = labels.size();
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= c || predictions[i] >= c) throw std::invalid_argument("score_predictions: class index out of range");
    ++r.confusion[labels[i]][predictions[i]];
    correct += labels[i] == predictions[i];
  }
  r.accuracy = r.n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(r.n);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t row = 0;
    for (auto v : r.confusion[k]) row += v;
    r.per_class_accuracy.push_back(row == 0 ? std::nullopt
                                            : std::optional<double>(static_cast<double>(r.confusion[k][k]) /
                                                                    static_cast<double>(row)));
  }
  return r;
}

TaskSelection select_samples(const ZeroShotTask& task, std::span<const EvalSample> samples, bool balance) {
  TaskSelection all;
  std::vector<std::size_t> counts(task.classes.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto label = task.label_of(samples[i].labels);
    if (!label) continue;
    if (*label >= task.classes.size()) throw std::logic_error("task " + task.name + ": label rule out of range");
    all.indices.push_back(i);
    all.labels.push_back(*label);
    ++counts[*label];
  }
  if (!balance) return all;
  std::size_t k = 0;
  for (auto c : counts) {
    if (c > 0) k = k == 0 ? c : std::min(k, c);
  }
  TaskSelection out;
  std::vector<std::size_t> taken(task.classes.size(), 0);
  for (std::size_t j = 0; j < all.indices.size(); ++j) {
    if (taken[all.labels[j]]++ < k) {
      out.indices.push_back(all.indices[j]);
      out.labels.push_back(all.labels[j]);
    }
  }
  return out;
}

TaskResult evaluate_task(const training::ClipModel& model, const ZeroShotTask& task,
                         std::span<const EvalSample> samples, const EvalOptions& options) {
  const auto selection = select_samples(task, samples, options.balance);
  if (selection.indices.empty()) {
    throw std::invalid_argument("task " + task.name + ": no evaluation sample maps to a class");
  }
  const Tensor class_emb = build_class_embeddings(model, task);
  std::vector<std::size_t> predictions;
  const std::size_t s = model.config().image.input_size;
  for (std::size_t start = 0; start < selection.indices.size(); start += options.batch) {
    const std::size_t end = std::min(selection.indices.size(), start + options.batch);
    std::vector<double> data;
    data.reserve((end - start) * 3 * s * s);
    for (std::size_t j = start; j < end; ++j) {
      const Tensor& img = samples[selection.indices[j]].image;
      if (img.shape() != autodiff::Shape{3, s, s}) {
        throw autodiff::ShapeError("evaluate_task", img.shape(), {3, s, s}, "sample image does not match the model");
      }
      data.insert(data.end(), img.data().begin(), img.data().end());
    }
    const auto part = classify_images(model, Tensor({end - start, 3, s, s}, std::move(data)), class_emb);
    predictions.insert(predictions.end(), part.begin(), part.end());
  }
  return score_predictions(task, selection.labels, predictions);
}

}  // namespace synclip::zeroshot
