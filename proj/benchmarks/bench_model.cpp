#include <benchmark/benchmark.h>

#include <cmath>

#include "synclip/autodiff/adam.hpp"
#include "synclip/syndata/caption.hpp"
#include "synclip/syndata/corpus.hpp"
#include "synclip/training/trainer.hpp"

namespace {

using namespace synclip;

struct Setup {
  std::vector<syndata::PairRecord> records;
  std::vector<const syndata::PairRecord*> refs;
  training::ClipModel model;
  training::Batch batch;

  explicit Setup(std::size_t b)
      : model(training::ClipModel::initialize(config(), syndata::caption_vocabulary(), std::log(1 / 0.07), 1)) {
    for (std::size_t i = 0; i < b; ++i) records.push_back(syndata::generate_pair(1, i, syndata::LabelPriors{}));
    for (const auto& r : records) refs.push_back(&r);
    batch = training::prepare_batch(model, refs, syndata::ProceduralImages(64));
  }
  static training::ModelConfig config() {
    training::ModelConfig c;
    c.text.vocab_size = syndata::caption_vocabulary().size();
    return c;
  }
};

void BM_EncodeImages(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.model.encode_images(s.batch.images));
}
BENCHMARK(BM_EncodeImages)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EncodeTexts(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.model.encode_tokens(s.batch.tokens));
}
BENCHMARK(BM_EncodeTexts)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  autodiff::AdamState adam;
  for (auto _ : state) benchmark::DoNotOptimize(training::train_step(s.model, adam, s.batch, {}));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
