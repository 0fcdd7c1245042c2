#include "synclip/encoders/image_encoder.hpp"

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

bool block_downsamples(std::size_t block) { return block > 0 && block % 2 == 0; }

std::string block_prefix(std::size_t block) { return "image.block" + std::to_string(block); }

Tensor kaiming(Rng& rng, Shape shape, std::size_t fan_in) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  Tensor t = autodiff::standard_normal(rng, std::move(shape));
  std::vector<double> v(t.data().begin(), t.data().end());
  for (auto& x : v) x *= stddev;
  return Tensor::parameter(t.shape(), std::move(v));
}

void add_conv(ParameterSet& params, Rng& rng, const std::string& name, std::size_t out, std::size_t in, std::size_t k) {
  params.add(name + ".weight", kaiming(rng, {out, in, k, k}, in * k * k));
  params.add(name + ".bias", Tensor::zeros({out}).as_parameter());
}

void add_norm(ParameterSet& params, const std::string& name, std::size_t channels) {
  params.add(name + ".gamma", Tensor::full({channels, 1, 1}, 1.0).as_parameter());
  params.add(name + ".beta", Tensor::zeros({channels, 1, 1}).as_parameter());
}

Tensor conv(const ParameterSet& p, const std::string& name, const Tensor& x, std::size_t stride, std::size_t padding) {
  return ops::conv2d(x, p.get(name + ".weight"), p.get(name + ".bias"), {stride, padding});
}

Tensor norm(const ParameterSet& p, const std::string& name, const Tensor& x) {
  const auto& s = x.shape();
  Tensor flat = ops::reshape(x, {s[0], s[1] * s[2] * s[3]});
  Tensor normalized = ops::reshape(ops::layer_norm(flat), s);
  return ops::add(ops::mul(normalized, p.get(name + ".gamma")), p.get(name + ".beta"));
}

}  // namespace

std::size_t ImageEncoderConfig::downsampling_stages() const {
  std::size_t stages = 1;
  for (std::size_t b = 0; b < num_residual_blocks; ++b) stages += block_downsamples(b) ? 1 : 0;
  return stages;
}

std::size_t ImageEncoderConfig::final_channels() const {
  std::size_t c = stem_channels;
  for (std::size_t b = 0; b < num_residual_blocks; ++b) c *= block_downsamples(b) ? 2 : 1;
  return c;
}

std::size_t ImageEncoderConfig::final_spatial_size() const { return input_size >> downsampling_stages(); }

void ImageEncoderConfig::validate() const {
  if (stem_channels == 0) throw autodiff::DomainError("ImageEncoderConfig: stem_channels must be positive");
  if (embed_dim < 8) throw autodiff::DomainError("ImageEncoderConfig: embed_dim must be >= 8");
  const std::size_t factor = std::size_t{1} << downsampling_stages();
  if (input_size == 0 || input_size % factor != 0) {
    throw autodiff::DomainError("ImageEncoderConfig: input_size " + std::to_string(input_size) +
                                " must be divisible by " + std::to_string(factor));
  }
}

ImageEncoder::ImageEncoder(ImageEncoderConfig config) : config_(config) { config_.validate(); }

void ImageEncoder::init_parameters(Rng& rng, ParameterSet& params) const {
  const std::size_t c0 = config_.stem_channels;
  add_conv(params, rng, "image.stem", c0, 3, 3);
  add_norm(params, "image.stem.norm", c0);
  std::size_t cin = c0;
  for (std::size_t b = 0; b < config_.num_residual_blocks; ++b) {
    const std::size_t cout = block_downsamples(b) ? cin * 2 : cin;
    const auto prefix = block_prefix(b);
    add_conv(params, rng, prefix + ".conv1", cout, cin, 3);
    add_norm(params, prefix + ".norm1", cout);
    add_conv(params, rng, prefix + ".conv2", cout, cout, 3);
    add_norm(params, prefix + ".norm2", cout);
    if (cout != cin) add_conv(params, rng, prefix + ".skip", cout, cin, 1);
    cin = cout;
  }
  params.add("image.head.weight", kaiming(rng, {cin, config_.embed_dim}, cin));
  params.add("image.head.bias", Tensor::zeros({config_.embed_dim}).as_parameter());
}

std::size_t ImageEncoder::parameter_count() const {
  const std::size_t c0 = config_.stem_channels;
  std::size_t n = 27 * c0 + c0 + 2 * c0;
  std::size_t cin = c0;
  for (std::size_t b = 0; b < config_.num_residual_blocks; ++b) {
    const std::size_t cout = block_downsamples(b) ? cin * 2 : cin;
    n += 9 * cin * cout + cout + 2 * cout;
    n += 9 * cout * cout + cout + 2 * cout;
    if (cout != cin) n += cin * cout + cout;
    cin = cout;
  }
  return n + cin * config_.embed_dim + config_.embed_dim;
}

Tensor ImageEncoder::encode(const ParameterSet& params, const Tensor& images) const {
  const auto& s = images.shape();
  const Shape expected{s.empty() ? 1 : s[0], 3, config_.input_size, config_.input_size};
  if (s.size() != 4 || s != expected) throw autodiff::ShapeError("encode_image", s, expected, "expected [B, 3, S, S]");

  Tensor h = ops::relu(norm(params, "image.stem.norm", conv(params, "image.stem", images, 2, 1)));
  for (std::size_t b = 0; b < config_.num_residual_blocks; ++b) {
    const auto prefix = block_prefix(b);
    const std::size_t stride = block_downsamples(b) ? 2 : 1;
    Tensor y = ops::relu(norm(params, prefix + ".norm1", conv(params, prefix + ".conv1", h, stride, 1)));
    y = ops::relu(norm(params, prefix + ".norm2", conv(params, prefix + ".conv2", y, 1, 1)));
    Tensor skip = params.contains(prefix + ".skip.weight") ? conv(params, prefix + ".skip", h, stride, 0) : h;
    h = ops::add(y, skip);
  }
  const auto& hs = h.shape();
  Tensor pooled = ops::mean(ops::reshape(h, {hs[0], hs[1], hs[2] * hs[3]}), 2);
  Tensor projected = ops::add(ops::matmul(pooled, params.get("image.head.weight")), params.get("image.head.bias"));
  return ops::l2_normalize(projected, -1);
}

}  // namespace synclip::encoders
