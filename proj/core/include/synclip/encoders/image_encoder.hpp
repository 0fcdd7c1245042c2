#pragma once

#include <cstddef>

#include "synclip/autodiff/parameters.hpp"
#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tensor.hpp"

namespace synclip::encoders {

struct ImageEncoderConfig {
  std::size_t input_size = 64;
  std::size_t stem_channels = 16;
  std::size_t num_residual_blocks = 4;
  std::size_t embed_dim = 64;

  /// Stride-2 stages: the stem plus the first block of every later pair.
  std::size_t downsampling_stages() const;
  std::size_t final_channels() const;
  std::size_t final_spatial_size() const;
  void validate() const;

  bool operator==(const ImageEncoderConfig&) const = default;
};

/// Small residual CNN:
///
///   stem:  conv3x3/2 -> norm -> relu
///   block: relu(norm(conv3x3)) -> relu(norm(conv3x3)) + skip
///          blocks 2, 4, ... halve the resolution and double the channels,
///          with a 1x1/2 projection on the skip path
///   head:  global average pool -> linear -> l2 normalize
///
/// "norm" normalizes each sample over (C, H, W) and applies a per-channel
/// affine, so embeddings never depend on other images in the batch.
class ImageEncoder {
 public:
  explicit ImageEncoder(ImageEncoderConfig config);

  const ImageEncoderConfig& config() const noexcept { return config_; }

  /// Adds the "image.*" parameters to `params`. Conv/linear weights are
  /// N(0, 2 / fan_in); biases and norm shifts start at 0, norm scales at 1.
  void init_parameters(autodiff::Rng& rng, autodiff::ParameterSet& params) const;

  /// Closed-form number of scalar parameters.
  std::size_t parameter_count() const;

  /// images [B, 3, S, S] in [0, 1] -> unit-norm embeddings [B, d].
  autodiff::Tensor encode(const autodiff::ParameterSet& params, const autodiff::Tensor& images) const;

 private:
  ImageEncoderConfig config_;
};

}  // namespace synclip::encoders
