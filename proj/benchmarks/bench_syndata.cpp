#include <benchmark/benchmark.h>

#include "synclip/syndata/corpus.hpp"
#include "synclip/syndata/detectors.hpp"

namespace {

using namespace synclip::syndata;

void BM_RenderPair(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  std::size_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_pair(generate_pair(7, id++, LabelPriors{}), size));
}
BENCHMARK(BM_RenderPair)->Arg(64)->Arg(128);

void BM_MeasureFindings(benchmark::State& state) {
  const auto image = render_pair(generate_pair(7, 3, LabelPriors{}), 64);
  for (auto _ : state) benchmark::DoNotOptimize(measure_findings(image));
}
BENCHMARK(BM_MeasureFindings);

void BM_GenerateCorpus(benchmark::State& state) {
  CorpusConfig config;
  config.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(config));
}
BENCHMARK(BM_GenerateCorpus)->Arg(2500)->Unit(benchmark::kMillisecond);

}  // namespace
