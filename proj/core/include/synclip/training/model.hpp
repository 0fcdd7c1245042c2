#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "synclip/autodiff/parameters.hpp"
#include "synclip/encoders/image_encoder.hpp"
#include "synclip/encoders/text_encoder.hpp"
#include "synclip/encoders/vocabulary.hpp"

namespace synclip::training {

inline constexpr const char* kLogTemperatureName = "logit.log_temperature";

struct ModelConfig {
  encoders::ImageEncoderConfig image;
  encoders::TextEncoderConfig text;

  /// Both encoders must share embed_dim.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Image encoder, text encoder, vocabulary and the learnable log-temperature
/// in one parameter set (names "image.*", "text.*", kLogTemperatureName).
///
/// Images are shifted by a fixed mean image [3, S, S] before the image
/// encoder. It is a statistic of the training data, not a learned
/// parameter, and stays zero unless training sets it.
class ClipModel {
 public:
  ClipModel(ModelConfig config, encoders::Vocabulary vocab, autodiff::ParameterSet params);
  ClipModel(ModelConfig config, encoders::Vocabulary vocab, autodiff::ParameterSet params, autodiff::Tensor image_mean);

  /// Fresh random initialization. text.vocab_size is taken from `vocab`.
  static ClipModel initialize(ModelConfig config, encoders::Vocabulary vocab, double log_temperature,
                              std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const encoders::Vocabulary& vocabulary() const noexcept { return vocab_; }
  const autodiff::ParameterSet& parameters() const noexcept { return params_; }
  autodiff::ParameterSet& parameters() noexcept { return params_; }
  const autodiff::Tensor& log_temperature() const { return params_.get(kLogTemperatureName); }

  const autodiff::Tensor& image_mean() const noexcept { return image_mean_; }
  /// Throws DomainError unless `mean` is [3, S, S] with finite values.
  void set_image_mean(autodiff::Tensor mean);

  encoders::TokenBatch tokenize(std::span<const std::string> captions) const;
  autodiff::Tensor encode_images(const autodiff::Tensor& images) const;
  autodiff::Tensor encode_tokens(const encoders::TokenBatch& tokens) const;
  autodiff::Tensor encode_texts(std::span<const std::string> captions) const;

 private:
  ModelConfig config_;
  encoders::Vocabulary vocab_;
  encoders::ImageEncoder image_encoder_;
  encoders::TextEncoder text_encoder_;
  autodiff::ParameterSet params_;
  autodiff::Tensor image_mean_;
};

}  // namespace synclip::training
