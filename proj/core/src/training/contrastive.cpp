#include "synclip/training/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "synclip/autodiff/ops.hpp"

namespace synclip::training {

using autodiff::Tensor;
namespace ops = autodiff::ops;

namespace {

constexpr double kNormTolerance = 1e-6;

void check_unit_rows(const Tensor& emb, const char* which) {
  const std::size_t d = emb.dim(1);
  for (std::size_t i = 0; i < emb.dim(0); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += emb[i * d + k] * emb[i * d + k];
    if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
      throw autodiff::DomainError(std::string("contrastive_loss: ") + which + " row " + std::to_string(i) +
                                  " has norm " + std::to_string(std::sqrt(sq)) + ", expected 1");
    }
  }
}

}  // namespace

double logit_scale(double log_temperature, double max_scale) { return std::min(std::exp(log_temperature), max_scale); }

Tensor contrastive_loss(const Tensor& image_emb, const Tensor& text_emb, const Tensor& log_temperature,
                        double max_scale) {
  if (image_emb.rank() != 2 || image_emb.shape() != text_emb.shape()) {
    throw autodiff::ShapeError("contrastive_loss", image_emb.shape(), text_emb.shape(),
                               "embeddings must both be [B, d]");
  }
  if (log_temperature.size() != 1) {
    throw autodiff::ShapeError("contrastive_loss", log_temperature.shape(), {}, "log temperature must be a scalar");
  }
  const std::size_t b = image_emb.dim(0);
  if (b < 2) throw autodiff::DomainError("contrastive_loss: batch size must be at least 2, got " + std::to_string(b));
  check_unit_rows(image_emb, "image");
  check_unit_rows(text_emb, "text");

  const Tensor scale = std::exp(log_temperature[0]) >= max_scale ? Tensor::scalar(max_scale)
                                                                 : ops::reshape(ops::exp(log_temperature), {});
  const Tensor logits = ops::mul(ops::matmul(image_emb, ops::transpose(text_emb)), scale);

  std::vector<double> eye(b * b, 0.0);
  for (std::size_t i = 0; i < b; ++i) eye[i * b + i] = 1.0;
  const Tensor targets({b, b}, std::move(eye));
  const Tensor rows = ops::sum(ops::mul(ops::log(ops::softmax(logits, 1)), targets));
  const Tensor cols = ops::sum(ops::mul(ops::log(ops::softmax(logits, 0)), targets));
  return ops::scale(ops::add(rows, cols), -1.0 / (2.0 * static_cast<double>(b)));
}

}  // namespace synclip::training
