#pragma once

#include "synclip/autodiff/tensor.hpp"

namespace synclip::training {

inline constexpr double kDefaultMaxLogitScale = 100.0;

/// min(exp(log_temperature), max_scale).
double logit_scale(double log_temperature, double max_scale = kDefaultMaxLogitScale);

/// Symmetric InfoNCE over a batch of matched pairs:
///
///   L    = min(exp(t), max_scale) * I T^T
///   loss = (mean_i CE(L[i, :], i) + mean_j CE(L[:, j], j)) / 2
///
/// When the clamp is active the scale is a constant and `log_temperature`
/// receives no gradient. Throws DomainError for B < 2 or rows whose norm
/// differs from 1 by more than 1e-6, ShapeError for mismatched inputs.
autodiff::Tensor contrastive_loss(const autodiff::Tensor& image_emb, const autodiff::Tensor& text_emb,
                                  const autodiff::Tensor& log_temperature,
                                  double max_scale = kDefaultMaxLogitScale);

}  // namespace synclip::training
