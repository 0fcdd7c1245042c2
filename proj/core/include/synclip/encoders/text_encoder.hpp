#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "synclip/autodiff/parameters.hpp"
#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tensor.hpp"
#include "synclip/encoders/vocabulary.hpp"

namespace synclip::encoders {

struct TextEncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 32;
  std::size_t model_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t embed_dim = 64;

  void validate() const;

  bool operator==(const TextEncoderConfig&) const = default;
};

/// Token ids for a batch of captions, row-major [batch, seq_len].
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> eos_positions;
};

TokenBatch make_token_batch(std::span<const TokenSequence> sequences);

/// Pre-norm transformer over word tokens with learned positions. Keys after
/// the first [EOS] are masked, so padding never reaches the output. The final
/// hidden state at [EOS] is projected to d and l2 normalized.
class TextEncoder {
 public:
  explicit TextEncoder(TextEncoderConfig config);

  const TextEncoderConfig& config() const noexcept { return config_; }

  /// Adds the "text.*" parameters. Embeddings are 0.02 * N(0, 1), dense
  /// weights N(0, 2 / fan_in), biases and norm shifts 0, norm scales 1.
  void init_parameters(autodiff::Rng& rng, autodiff::ParameterSet& params) const;

  std::size_t parameter_count() const;

  /// -> unit-norm embeddings [B, d].
  autodiff::Tensor encode(const autodiff::ParameterSet& params, const TokenBatch& tokens) const;

 private:
  TextEncoderConfig config_;
};

}  // namespace synclip::encoders
