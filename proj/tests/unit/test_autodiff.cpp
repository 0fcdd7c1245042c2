#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "op_cases.hpp"
#include "synclip/autodiff/adam.hpp"
#include "synclip/autodiff/ops.hpp"
#include "synclip/autodiff/tape.hpp"

namespace {

using synclip::autodiff::Rng;
using synclip::autodiff::Shape;
using synclip::autodiff::Tensor;
using synclip::testkit::check_gradients;
using synclip::testkit::fixed_weight_sum;
using synclip::testkit::op_cases;
using synclip::testkit::random_away_from_zero;
using synclip::testkit::random_tensor;
using synclip::testkit::weighted_sum;
namespace ad = synclip::autodiff;
namespace ops = synclip::autodiff::ops;

constexpr int kPointsPerOp = 20;
constexpr double kTolerance = 1e-4;


class OpGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  const auto cases = op_cases();
  const auto result = synclip::testkit::check_op_case(cases[GetParam()], GetParam(), kPointsPerOp);
  EXPECT_LE(result.max_relative_error, kTolerance) << result.worst;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range<std::size_t>(0, op_cases().size()),
                         [](const auto& info) { return std::string(op_cases()[info.param].name); });

TEST(OpGradient, L2NormalizeThenDotMatchesTightly) {
  Rng rng(5);
  const auto result = check_gradients(
      [](std::span<const Tensor> x) { return ops::sum(ops::mul(ops::l2_normalize(x[0]), ops::l2_normalize(x[1]))); },
      {random_tensor(rng, {1, 6}), random_tensor(rng, {1, 6})});
  EXPECT_LT(result.max_relative_error, 1e-5) << result.worst;
}

TEST(OpGradient, SingleChannelConvolution) {
  Rng rng(6);
  const auto result = check_gradients(
      [](std::span<const Tensor> x) { return fixed_weight_sum(ops::conv2d(x[0], x[1], {1, 1})); },
      {random_tensor(rng, {1, 1, 6, 6}), random_tensor(rng, {1, 1, 3, 3})});
  EXPECT_LT(result.max_relative_error, 1e-4) << result.worst;
}

TEST(OpGradient, RandomCompositions) {
  // f(g(x)) for five unrelated pairs; the chain rule must match differences.
  const std::vector<std::function<Tensor(const Tensor&)>> chains = {
      [](const Tensor& x) { return ops::softmax(ops::gelu(x)); },
      [](const Tensor& x) { return ops::layer_norm(ops::exp(ops::scale(x, 0.5))); },
      [](const Tensor& x) { return ops::l2_normalize(ops::matmul(x, ops::transpose(x))); },
      [](const Tensor& x) { return ops::log(ops::add(ops::mul(x, x), Tensor::scalar(0.5))); },
      [](const Tensor& x) { return ops::mean(ops::softmax(ops::reshape(x, {4, 3}), 0), 1); },
  };
  Rng rng(7);
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& chain = chains[i];
    const auto result = check_gradients([&](std::span<const Tensor> x) { return fixed_weight_sum(chain(x[0])); },
                                        {random_tensor(rng, {3, 4})});
    EXPECT_LE(result.max_relative_error, kTolerance) << "composition " << i << ": " << result.worst;
  }
}

TEST(OpGradient, ReusedInputAccumulates) {
  Rng rng(8);
  const auto result = check_gradients(
      [](std::span<const Tensor> x) { return ops::sum(ops::mul(ops::add(x[0], x[0]), ops::exp(x[0]))); },
      {random_tensor(rng, {4})});
  EXPECT_LE(result.max_relative_error, kTolerance) << result.worst;
}

TEST(Softmax, RowsSumToOne) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_tensor(rng, {4, 7}, -40.0, 40.0);
    for (std::ptrdiff_t axis : {0, 1}) {
      const Tensor y = ops::softmax(x, axis);
      const Tensor s = ops::sum(y, axis);
      for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], 1.0, 1e-12);
    }
  }
}

TEST(Softmax, ExtremeLogitsStayFinite) {
  const Tensor y = ops::softmax(Tensor({1, 3}, {1000.0, -1000.0, 0.0}));
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_TRUE(std::isfinite(y[1]) && std::isfinite(y[2]));
}

TEST(L2Normalize, UnitNormForAnyScale) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const double magnitude = std::pow(10.0, rng.uniform(-5.5, 6.0));
    Tensor x = random_tensor(rng, {1, 9});
    x = ops::scale(x, magnitude / std::sqrt(ops::sum(ops::mul(x, x)).item()));
    const Tensor y = ops::l2_normalize(x);
    EXPECT_NEAR(std::sqrt(ops::sum(ops::mul(y, y)).item()), 1.0, 1e-9) << magnitude;
  }
}

TEST(Determinism, SameSeedSameOpsBitIdentical) {
  auto run = [] {
    Rng rng(77);
    Tensor w = ad::standard_normal(rng, {6, 4}).as_parameter();
    Tensor x = ad::standard_normal(rng, {3, 6});
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor loss = ops::mean(ops::softmax(ops::gelu(ops::matmul(x, w))));
    auto grads = tape.backward(loss);
    std::vector<double> out(grads.at(w).data().begin(), grads.at(w).data().end());
    out.push_back(loss.item());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Shapes, MismatchesThrowShapeError) {
  EXPECT_THROW(ops::matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2})), ad::ShapeError);
  EXPECT_THROW(ops::add(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), ad::ShapeError);
  EXPECT_THROW(ops::reshape(Tensor::zeros({2, 3}), {5}), ad::ShapeError);
  EXPECT_THROW(ops::conv2d(Tensor::zeros({1, 2, 4, 4}), Tensor::zeros({1, 3, 3, 3})), ad::ShapeError);
  EXPECT_THROW(ops::log(Tensor({2}, {1.0, -1.0})), ad::DomainError);
}

TEST(Tape, SecondBackwardIsRejected) {
  Tensor w = Tensor::full({2}, 1.0).as_parameter();
  ad::Tape tape;
  ad::TapeScope scope(tape);
  Tensor loss = ops::sum(ops::mul(w, w));
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), ad::TapeError);
}

TEST(Tape, UntrackedOpsAreNotRecorded) {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  ops::exp(Tensor::full({3}, 0.5));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Adam, OneStepOnConstantGradient) {
  ad::ParameterSet params;
  params.add("p", Tensor::parameter({}, {1.0}));
  ad::AdamState state({0.1});
  ad::GradientMap grads;
  grads.insert(params.get("p").node_id(), Tensor::scalar(1.0));
  ad::adam_step(params, grads, state);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(params.get("p").item(), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, TwoStepsMatchHandRoll) {
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const std::array<double, 2> g = {0.3, -1.7};
  const std::array<double, 2> start = {0.5, -0.25};

  std::array<double, 2> p = start, m{}, v{};
  for (int t = 1; t <= 2; ++t) {
    const double gt = g[t - 1];
    for (int i = 0; i < 2; ++i) {
      const double grad = gt * (i + 1);
      m[i] = b1 * m[i] + (1 - b1) * grad;
      v[i] = b2 * v[i] + (1 - b2) * grad * grad;
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }

  ad::ParameterSet params;
  params.add("w", Tensor::parameter({2}, {start[0], start[1]}));
  ad::AdamState state({lr, b1, b2, eps});
  for (int t = 0; t < 2; ++t) {
    ad::GradientMap grads;
    grads.insert(params.get("w").node_id(), Tensor({2}, {g[t], 2 * g[t]}));
    ad::adam_step(params, grads, state);
  }
  EXPECT_NEAR(params.get("w")[0], p[0], 1e-15);
  EXPECT_NEAR(params.get("w")[1], p[1], 1e-15);
  EXPECT_EQ(state.step_count(), 2u);
}

TEST(Adam, MissingGradientLeavesParametersUntouched) {
  ad::ParameterSet params;
  params.add("a", Tensor::parameter({1}, {1.0}));
  params.add("b", Tensor::parameter({1}, {2.0}));
  ad::AdamState state;
  ad::GradientMap grads;
  grads.insert(params.get("a").node_id(), Tensor({1}, {1.0}));
  EXPECT_THROW(ad::adam_step(params, grads, state), ad::TapeError);
  EXPECT_EQ(params.get("a")[0], 1.0);
}

TEST(Rng, PhiloxKnownAnswers) {
  EXPECT_EQ(ad::philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(ad::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(ad::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, NormalMoments) {
  Rng rng(2024);
  constexpr int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n - mean * mean, 1.0, 0.02);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  EXPECT_NE(ad::derive_seed(1, 0), ad::derive_seed(1, 1));
}

TEST(Rng, BelowIsInRangeAndCoversIt) {
  Rng rng(3);
  std::array<int, 7> hits{};
  for (int i = 0; i < 7000; ++i) ++hits[rng.below(7)];
  for (int h : hits) EXPECT_GT(h, 850);
}

}  // namespace
