#include "synclip/training/model.hpp"

#include <cmath>
#include <vector>

#include "synclip/autodiff/ops.hpp"
#include "synclip/autodiff/rng.hpp"

namespace synclip::training {

using autodiff::Tensor;

namespace {
constexpr std::uint64_t kImageInitStream = 10;
constexpr std::uint64_t kTextInitStream = 11;
}  // namespace

void ModelConfig::validate() const {
  image.validate();
  text.validate();
  if (image.embed_dim != text.embed_dim) {
    throw autodiff::DomainError("ModelConfig: image embed_dim " + std::to_string(image.embed_dim) +
                                " differs from text embed_dim " + std::to_string(text.embed_dim));
  }
}

ClipModel::ClipModel(ModelConfig config, encoders::Vocabulary vocab, autodiff::ParameterSet params)
    : ClipModel(config, std::move(vocab), std::move(params),
                Tensor::zeros({3, config.image.input_size, config.image.input_size})) {}

ClipModel::ClipModel(ModelConfig config, encoders::Vocabulary vocab, autodiff::ParameterSet params, Tensor image_mean)
    : config_(config), vocab_(std::move(vocab)), image_encoder_(config.image), text_encoder_(config.text),
      params_(std::move(params)) {
  config_.validate();
  set_image_mean(std::move(image_mean));
  if (config_.text.vocab_size != vocab_.size()) {
    throw autodiff::DomainError("ClipModel: text vocab_size " + std::to_string(config_.text.vocab_size) +
                                " does not match vocabulary of " + std::to_string(vocab_.size()));
  }
  autodiff::ParameterSet reference;
  autodiff::Rng rng(0);
  image_encoder_.init_parameters(rng, reference);
  text_encoder_.init_parameters(rng, reference);
  reference.add(kLogTemperatureName, Tensor::scalar(0.0));
  if (reference.size() != params_.size()) {
    throw autodiff::DomainError("ClipModel: parameter set has " + std::to_string(params_.size()) +
                                " tensors, configuration needs " + std::to_string(reference.size()));
  }
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& want = reference.entries()[i];
    const auto& got = params_.entries()[i];
    if (want.name != got.name || want.value.shape() != got.value.shape()) {
      throw autodiff::DomainError("ClipModel: parameter " + std::to_string(i) + " is '" + got.name + "' " +
                                  autodiff::to_string(got.value.shape()) + ", expected '" + want.name + "' " +
                                  autodiff::to_string(want.value.shape()));
    }
  }
}

ClipModel ClipModel::initialize(ModelConfig config, encoders::Vocabulary vocab, double log_temperature,
                                std::uint64_t seed) {
  config.text.vocab_size = vocab.size();
  config.validate();
  autodiff::ParameterSet params;
  const autodiff::Rng root(seed);
  autodiff::Rng image_rng = root.derive(kImageInitStream);
  encoders::ImageEncoder(config.image).init_parameters(image_rng, params);
  autodiff::Rng text_rng = root.derive(kTextInitStream);
  encoders::TextEncoder(config.text).init_parameters(text_rng, params);
  params.add(kLogTemperatureName, Tensor::parameter({}, {log_temperature}));
  return ClipModel(config, std::move(vocab), std::move(params));
}

encoders::TokenBatch ClipModel::tokenize(std::span<const std::string> captions) const {
  std::vector<encoders::TokenSequence> seqs;
  seqs.reserve(captions.size());
  for (const auto& c : captions) seqs.push_back(encoders::tokenize(c, vocab_, config_.text.max_seq_len));
  return encoders::make_token_batch(seqs);
}

void ClipModel::set_image_mean(Tensor mean) {
  const std::size_t s = config_.image.input_size;
  if (mean.shape() != autodiff::Shape{3, s, s}) {
    throw autodiff::DomainError("ClipModel: image mean has shape " + autodiff::to_string(mean.shape()) +
                                ", expected " + autodiff::to_string(autodiff::Shape{3, s, s}));
  }
  for (double v : mean.data()) {
    if (!std::isfinite(v)) throw autodiff::DomainError("ClipModel: image mean has a non-finite value");
  }
  image_mean_ = mean.detached();
}

Tensor ClipModel::encode_images(const Tensor& images) const {
  const auto& s = images.shape();
  // Wrong shapes go straight to the encoder for its shape error.
  if (s.size() != 4 || s[1] != 3 || s[2] != config_.image.input_size || s[3] != config_.image.input_size) {
    return image_encoder_.encode(params_, images);
  }
  return image_encoder_.encode(params_, autodiff::ops::sub(images, image_mean_));
}

Tensor ClipModel::encode_tokens(const encoders::TokenBatch& tokens) const {
  return text_encoder_.encode(params_, tokens);
}

Tensor ClipModel::encode_texts(std::span<const std::string> captions) const {
  return encode_tokens(tokenize(captions));
}

}  // namespace synclip::training
