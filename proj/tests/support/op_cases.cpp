#include "op_cases.hpp"

#include <array>
#include <string>

#include "fixtures.hpp"
#include "synclip/autodiff/ops.hpp"
#include "synclip/training/contrastive.hpp"
#include "synclip/training/model.hpp"

namespace synclip::testkit {

using autodiff::Rng;
using autodiff::Shape;
using autodiff::Tensor;
namespace ops = autodiff::ops;

Tensor fixed_weight_sum(const Tensor& y) {
  // Drawn from a fixed stream so every point shares the weights.
  Rng rng(99);
  return weighted_sum(y, random_tensor(rng, y.shape(), -1.0, 1.0));
}

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  auto unary = [&](const char* name, Shape shape, auto op, bool away_from_zero = false) {
    cases.push_back({name,
                     [shape, away_from_zero](Rng& rng) {
                       return std::vector<Tensor>{away_from_zero ? random_away_from_zero(rng, shape)
                                                                 : random_tensor(rng, shape)};
                     },
                     [op](std::span<const Tensor> x) { return fixed_weight_sum(op(x[0])); }});
  };
  auto binary = [&](const char* name, Shape a, Shape b, auto op) {
    cases.push_back({name, [a, b](Rng& rng) { return std::vector<Tensor>{random_tensor(rng, a), random_tensor(rng, b)}; },
                     [op](std::span<const Tensor> x) { return fixed_weight_sum(op(x[0], x[1])); }});
  };

  binary("add", {2, 3}, {2, 3}, ops::add);
  binary("add_broadcast", {2, 3, 4}, {3, 1}, ops::add);
  binary("sub", {3, 4}, {4}, ops::sub);
  binary("mul", {2, 3}, {2, 3}, ops::mul);
  binary("mul_broadcast", {2, 3, 2}, {1, 3, 1}, ops::mul);
  unary("scale", {5}, [](const Tensor& x) { return ops::scale(x, -2.5); });
  binary("matmul", {3, 4}, {4, 2}, ops::matmul);
  binary("matmul_batched", {2, 3, 4}, {2, 4, 3}, ops::matmul);
  binary("matmul_shared_rhs", {2, 3, 4}, {4, 2}, ops::matmul);
  cases.push_back({"conv2d_bias_stride_pad",
                   [](Rng& rng) {
                     return std::vector<Tensor>{random_tensor(rng, {2, 2, 5, 5}), random_tensor(rng, {3, 2, 3, 3}),
                                                random_tensor(rng, {3})};
                   },
                   [](std::span<const Tensor> x) { return fixed_weight_sum(ops::conv2d(x[0], x[1], x[2], {2, 1})); }});
  cases.push_back({"conv2d_1x1_nobias",
                   [](Rng& rng) {
                     return std::vector<Tensor>{random_tensor(rng, {1, 3, 4, 4}), random_tensor(rng, {2, 3, 1, 1})};
                   },
                   [](std::span<const Tensor> x) { return fixed_weight_sum(ops::conv2d(x[0], x[1], {1, 0})); }});
  unary("relu", {3, 4}, ops::relu, true);
  unary("gelu", {3, 4}, ops::gelu);
  unary("exp", {3, 4}, ops::exp);
  cases.push_back({"log", [](Rng& rng) { return std::vector<Tensor>{random_tensor(rng, {3, 4}, 0.2, 2.0)}; },
                   [](std::span<const Tensor> x) { return fixed_weight_sum(ops::log(x[0])); }});
  unary("layer_norm", {3, 6}, [](const Tensor& x) { return ops::layer_norm(x); });
  cases.push_back({"layer_norm_affine",
                   [](Rng& rng) {
                     return std::vector<Tensor>{random_tensor(rng, {3, 5}), random_tensor(rng, {5}),
                                                random_tensor(rng, {5})};
                   },
                   [](std::span<const Tensor> x) { return fixed_weight_sum(ops::layer_norm(x[0], x[1], x[2])); }});
  unary("softmax_last", {3, 4}, [](const Tensor& x) { return ops::softmax(x, -1); });
  unary("softmax_axis0", {3, 4}, [](const Tensor& x) { return ops::softmax(x, 0); });
  unary("sum_all", {3, 4}, [](const Tensor& x) { return ops::scale(ops::sum(x), 0.7); });
  unary("sum_axis", {2, 3, 4}, [](const Tensor& x) { return ops::sum(x, 1); });
  unary("mean_all", {3, 4}, [](const Tensor& x) { return ops::scale(ops::mean(x), 1.3); });
  unary("mean_axis", {2, 3, 4}, [](const Tensor& x) { return ops::mean(x, -1); });
  unary("transpose", {2, 3, 4}, ops::transpose);
  unary("permute", {2, 3, 4, 2}, [](const Tensor& x) {
    const std::array<std::size_t, 4> axes{0, 2, 1, 3};
    return ops::permute(x, axes);
  });
  unary("reshape", {2, 6}, [](const Tensor& x) { return ops::reshape(x, {3, 2, 2}); });
  binary("concat", {2, 3}, {2, 2}, [](const Tensor& a, const Tensor& b) {
    const std::array<Tensor, 2> parts{a, b};
    return ops::concat(parts, 1);
  });
  unary("embedding_lookup", {5, 3}, [](const Tensor& table) {
    const std::array<std::size_t, 6> idx{4, 0, 2, 2, 1, 4};
    return ops::embedding_lookup(table, idx, {2, 3});
  });
  unary("l2_normalize", {3, 4}, [](const Tensor& x) { return ops::l2_normalize(x, -1); });
  unary("l2_normalize_axis0", {3, 4}, [](const Tensor& x) { return ops::l2_normalize(x, 0); });
  return cases;
}

GradCheckResult check_op_case(const OpCase& c, std::size_t case_index, int points) {
  Rng base(1234);
  GradCheckResult worst;
  for (int point = 0; point < points; ++point) {
    Rng rng = base.derive(case_index * 100 + static_cast<std::size_t>(point));
    auto result = check_gradients(c.fn, c.make_inputs(rng));
    worst.checked += result.checked;
    if (result.max_relative_error >= worst.max_relative_error) {
      worst.max_relative_error = result.max_relative_error;
      worst.worst = std::string(c.name) + " point " + std::to_string(point) + ": " + result.worst;
    }
  }
  return worst;
}

GradCheckResult check_encoder_to_loss() {
  const auto vocab = tiny_vocabulary();
  auto model = training::ClipModel::initialize(tiny_model_config(vocab.size()), vocab, 1.0, 31);
  Rng rng(32);
  const Tensor images = random_tensor(rng, {2, 3, 8, 8}, 0.0, 1.0);
  const std::vector<std::string> captions = {"red disc", "pale vessel macula"};
  const auto tokens = model.tokenize(captions);
  const auto values = parameter_values(model.parameters());
  return check_gradients(
      [&](std::span<const Tensor> x) {
        assign_parameters(model.parameters(), x);
        return training::contrastive_loss(model.encode_images(images), model.encode_tokens(tokens),
                                          model.log_temperature());
      },
      values);
}

}  // namespace synclip::testkit
