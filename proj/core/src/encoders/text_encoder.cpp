#include "synclip/encoders/text_encoder.hpp"

#include <array>
#include <cmath>
#include <string>

#include "synclip/autodiff/ops.hpp"

namespace synclip::encoders {

using autodiff::ParameterSet;
using autodiff::Rng;
using autodiff::Shape;
using autodiff::Tensor;
namespace ops = autodiff::ops;

namespace {

constexpr double kMaskedScore = -1e30;
constexpr std::size_t kFfnMultiplier = 4;

Tensor scaled_normal(Rng& rng, Shape shape, double stddev) {
  Tensor t = autodiff::standard_normal(rng, std::move(shape));
  std::vector<double> v(t.data().begin(), t.data().end());
  for (auto& x : v) x *= stddev;
  return Tensor::parameter(t.shape(), std::move(v));
}

void add_linear(ParameterSet& params, Rng& rng, const std::string& name, std::size_t in, std::size_t out) {
  params.add(name + ".weight", scaled_normal(rng, {in, out}, std::sqrt(2.0 / static_cast<double>(in))));
  params.add(name + ".bias", Tensor::zeros({out}).as_parameter());
}

void add_layer_norm(ParameterSet& params, const std::string& name, std::size_t dim) {
  params.add(name + ".gamma", Tensor::full({dim}, 1.0).as_parameter());
  params.add(name + ".beta", Tensor::zeros({dim}).as_parameter());
}

// x [N, in] -> [N, out]
Tensor linear(const ParameterSet& p, const std::string& name, const Tensor& x) {
  return ops::add(ops::matmul(x, p.get(name + ".weight")), p.get(name + ".bias"));
}

Tensor layer_norm(const ParameterSet& p, const std::string& name, const Tensor& x) {
  return ops::layer_norm(x, p.get(name + ".gamma"), p.get(name + ".beta"));
}

std::string layer_prefix(std::size_t layer) { return "text.layer" + std::to_string(layer); }

}  // namespace

void TextEncoderConfig::validate() const {
  if (vocab_size < 5) throw autodiff::DomainError("TextEncoderConfig: vocab_size must include at least one word");
  if (max_seq_len < 2) throw autodiff::DomainError("TextEncoderConfig: max_seq_len must be at least 2");
  if (model_dim == 0 || num_heads == 0 || model_dim % num_heads != 0) {
    throw autodiff::DomainError("TextEncoderConfig: model_dim " + std::to_string(model_dim) +
                                " must be a positive multiple of num_heads " + std::to_string(num_heads));
  }
  if (embed_dim < 8) throw autodiff::DomainError("TextEncoderConfig: embed_dim must be >= 8");
}

TokenBatch make_token_batch(std::span<const TokenSequence> sequences) {
  TokenBatch batch;
  batch.batch = sequences.size();
  if (sequences.empty()) throw autodiff::DomainError("make_token_batch: empty batch");
  batch.seq_len = sequences.front().ids.size();
  for (const auto& s : sequences) {
    if (s.ids.size() != batch.seq_len || s.eos_position >= batch.seq_len) {
      throw autodiff::DomainError("make_token_batch: sequences must share one length");
    }
    batch.ids.insert(batch.ids.end(), s.ids.begin(), s.ids.end());
    batch.eos_positions.push_back(s.eos_position);
  }
  return batch;
}

TextEncoder::TextEncoder(TextEncoderConfig config) : config_(config) { config_.validate(); }

void TextEncoder::init_parameters(Rng& rng, ParameterSet& params) const {
  const std::size_t d = config_.model_dim;
  params.add("text.token_embedding", scaled_normal(rng, {config_.vocab_size, d}, 0.02));
  params.add("text.position_embedding", scaled_normal(rng, {config_.max_seq_len, d}, 0.02));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const auto prefix = layer_prefix(l);
    add_layer_norm(params, prefix + ".ln1", d);
    add_linear(params, rng, prefix + ".attn.query", d, d);
    add_linear(params, rng, prefix + ".attn.key", d, d);
    add_linear(params, rng, prefix + ".attn.value", d, d);
    add_linear(params, rng, prefix + ".attn.out", d, d);
    add_layer_norm(params, prefix + ".ln2", d);
    add_linear(params, rng, prefix + ".ffn.fc1", d, kFfnMultiplier * d);
    add_linear(params, rng, prefix + ".ffn.fc2", kFfnMultiplier * d, d);
  }
  add_layer_norm(params, "text.final_ln", d);
  add_linear(params, rng, "text.head", d, config_.embed_dim);
}

std::size_t TextEncoder::parameter_count() const {
  const std::size_t d = config_.model_dim;
  const std::size_t f = kFfnMultiplier * d;
  const std::size_t per_layer = 2 * d + 4 * (d * d + d) + 2 * d + (d * f + f) + (f * d + d);
  return (config_.vocab_size + config_.max_seq_len) * d + config_.num_layers * per_layer + 2 * d +
         d * config_.embed_dim + config_.embed_dim;
}

Tensor TextEncoder::encode(const ParameterSet& params, const TokenBatch& tokens) const {
  const std::size_t b = tokens.batch;
  const std::size_t t = tokens.seq_len;
  const std::size_t d = config_.model_dim;
  const std::size_t heads = config_.num_heads;
  const std::size_t dh = d / heads;
  if (b == 0 || t != config_.max_seq_len || tokens.ids.size() != b * t || tokens.eos_positions.size() != b) {
    throw autodiff::ShapeError("encode_text", {b, t}, {b, config_.max_seq_len}, "token batch does not match config");
  }

  std::vector<double> mask(b * t, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = tokens.eos_positions[i] + 1; j < t; ++j) mask[i * t + j] = kMaskedScore;
  }
  const Tensor key_mask({b, 1, 1, t}, std::move(mask));

  Tensor x = ops::add(ops::embedding_lookup(params.get("text.token_embedding"), tokens.ids, {b, t}),
                      params.get("text.position_embedding"));
  x = ops::reshape(x, {b * t, d});

  static constexpr std::array<std::size_t, 4> kSplitHeads{0, 2, 1, 3};
  auto split_heads = [&](const Tensor& m) { return ops::permute(ops::reshape(m, {b, t, heads, dh}), kSplitHeads); };
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const auto prefix = layer_prefix(l);
    const Tensor h = layer_norm(params, prefix + ".ln1", x);
    const Tensor q = split_heads(linear(params, prefix + ".attn.query", h));
    const Tensor k = split_heads(linear(params, prefix + ".attn.key", h));
    const Tensor v = split_heads(linear(params, prefix + ".attn.value", h));
    Tensor scores = ops::add(ops::scale(ops::matmul(q, ops::transpose(k)), score_scale), key_mask);
    Tensor context = ops::matmul(ops::softmax(scores, -1), v);
    context = ops::reshape(ops::permute(context, kSplitHeads), {b * t, d});
    x = ops::add(x, linear(params, prefix + ".attn.out", context));

    const Tensor h2 = layer_norm(params, prefix + ".ln2", x);
    x = ops::add(x, linear(params, prefix + ".ffn.fc2", ops::gelu(linear(params, prefix + ".ffn.fc1", h2))));
  }
  x = layer_norm(params, "text.final_ln", x);

  std::vector<std::size_t> rows(b);
  for (std::size_t i = 0; i < b; ++i) rows[i] = i * t + tokens.eos_positions[i];
  const Tensor pooled = ops::embedding_lookup(x, rows, {b});
  return ops::l2_normalize(linear(params, "text.head", pooled), -1);
}

}  // namespace synclip::encoders
