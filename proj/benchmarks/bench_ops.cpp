#include <benchmark/benchmark.h>

#include "synclip/autodiff/ops.hpp"
#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tape.hpp"

namespace {

using synclip::autodiff::Rng;
using synclip::autodiff::Tensor;
namespace ad = synclip::autodiff;
namespace ops = synclip::autodiff::ops;

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = ad::standard_normal(rng, {n, n});
  const Tensor b = ad::standard_normal(rng, {n, n});
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_Conv2dForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Tensor x = ad::standard_normal(rng, {32, c, 32, 32});
  const Tensor w = ad::standard_normal(rng, {c, c, 3, 3});
  const Tensor b = Tensor::zeros({c});
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv2d(x, w, b, {1, 1}));
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Tensor x = ad::standard_normal(rng, {32, c, 32, 32}).as_parameter();
  const Tensor w = ad::standard_normal(rng, {c, c, 3, 3}).as_parameter();
  const Tensor b = Tensor::zeros({c}).as_parameter();
  for (auto _ : state) {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    benchmark::DoNotOptimize(tape.backward(ops::sum(ops::conv2d(x, w, b, {1, 1}))));
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SoftmaxRows(benchmark::State& state) {
  Rng rng(4);
  const Tensor x = ad::standard_normal(rng, {32 * 4 * 32, 32});
  for (auto _ : state) benchmark::DoNotOptimize(ops::softmax(x));
}
BENCHMARK(BM_SoftmaxRows);

}  // namespace
