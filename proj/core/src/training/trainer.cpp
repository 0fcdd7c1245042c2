#include "synclip/training/trainer.hpp"

#include <algorithm>
#include <array>
#include <future>
#include <numeric>
#include <string>

#include "synclip/autodiff/rng.hpp"
#include "synclip/autodiff/tape.hpp"
#include "synclip/training/contrastive.hpp"
#include "synclip/training/retrieval.hpp"

namespace synclip::training {

using autodiff::Tensor;
using syndata::PairRecord;

namespace {
constexpr std::uint64_t kShuffleStream = 0x73687566666c65ULL;  // "shuffle"
}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("train: batch_size must be at least 2");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!std::isfinite(initial_log_temperature)) throw std::invalid_argument("train: log_temperature must be finite");
  if (!(max_logit_scale > 0.0)) throw std::invalid_argument("train: max_logit_scale must be positive");
}

autodiff::Tensor mean_image(std::span<const PairRecord* const> records, const syndata::ImageSource& source,
                            std::size_t threads) {
  if (records.empty()) throw std::invalid_argument("mean_image: no records");
  const std::size_t s = source.image_size();
  const std::size_t per = 3 * s * s;
  constexpr std::size_t kChunk = 64;
  std::vector<double> sum(per, 0.0);
  for (std::size_t start = 0; start < records.size(); start += kChunk) {
    const std::vector<const PairRecord*> chunk(records.begin() + start,
                                               records.begin() + std::min(records.size(), start + kChunk));
    const Tensor batch = syndata::image_batch(source, chunk, threads);
    const auto data = batch.data();
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      for (std::size_t k = 0; k < per; ++k) sum[k] += data[i * per + k];
    }
  }
  const double n = static_cast<double>(records.size());
  for (auto& v : sum) v /= n;
  return Tensor({3, s, s}, std::move(sum));
}

Batch prepare_batch(const ClipModel& model, std::span<const PairRecord* const> records,
                    const syndata::ImageSource& source, std::size_t threads) {
  std::vector<const PairRecord*> list(records.begin(), records.end());
  std::vector<std::string> captions;
  captions.reserve(list.size());
  for (const auto* r : list) captions.push_back(r->caption);
  return {syndata::image_batch(source, list, threads), model.tokenize(captions)};
}

StepRecord train_step(ClipModel& model, autodiff::AdamState& state, const Batch& batch, const TrainConfig& config) {
  autodiff::Tape tape;
  StepRecord record;
  autodiff::GradientMap grads;
  {
    autodiff::TapeScope scope(tape);
    const Tensor image_emb = model.encode_images(batch.images);
    const Tensor text_emb = model.encode_tokens(batch.tokens);
    const Tensor& log_temp = model.log_temperature();
    const Tensor loss = contrastive_loss(image_emb, text_emb, log_temp, config.max_logit_scale);
    record.loss = loss.item();
    record.logit_scale = logit_scale(log_temp.item(), config.max_logit_scale);
    grads = tape.backward(loss);
  }
  // A clamped temperature takes no part in the loss; give it a zero gradient.
  const Tensor& log_temp = model.log_temperature();
  if (!grads.find(log_temp)) grads.insert(log_temp.node_id(), Tensor::zeros(log_temp.shape()));
  autodiff::adam_step(model.parameters(), grads, state);
  return record;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (n < 2) return order;
  autodiff::Rng rng(autodiff::derive_seed(seed ^ kShuffleStream, epoch));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  return order;
}

std::vector<StepRecord> train_epoch(ClipModel& model, autodiff::AdamState& state, std::span<const PairRecord* const> train,
                                    const syndata::ImageSource& source, const TrainConfig& config, std::size_t epoch,
                                    std::size_t first_step, std::size_t threads, const StepCallback& on_step) {
  config.validate();
  if (train.size() < config.batch_size) {
    throw TrainingError("train split has " + std::to_string(train.size()) + " pairs, fewer than batch_size " +
                        std::to_string(config.batch_size));
  }
  const auto order = epoch_order(train.size(), config.seed, epoch);
  const std::size_t batches = train.size() / config.batch_size;
  auto batch_records = [&](std::size_t b) {
    std::vector<const PairRecord*> out(config.batch_size);
    for (std::size_t k = 0; k < config.batch_size; ++k) out[k] = train[order[b * config.batch_size + k]];
    return out;
  };
  auto prepare = [&](std::size_t b) {
    const auto records = batch_records(b);
    return prepare_batch(model, records, source, threads > 1 ? threads - 1 : 1);
  };

  std::vector<StepRecord> records;
  std::future<Batch> ahead;
  for (std::size_t b = 0; b < batches; ++b) {
    try {
      Batch batch = ahead.valid() ? ahead.get() : prepare(b);
      if (threads > 1 && b + 1 < batches) ahead = std::async(std::launch::async, prepare, b + 1);
      StepRecord rec = train_step(model, state, batch, config);
      rec.epoch = epoch;
      rec.step = first_step + b;
      records.push_back(rec);
      if (on_step) on_step(rec);
    } catch (const TrainingError&) {
      throw;
    } catch (const std::exception& e) {
      if (ahead.valid()) ahead.wait();
      throw TrainingError("epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + ": " + e.what());
    }
  }
  return records;
}

double validation_loss(const ClipModel& model, std::span<const PairRecord* const> records,
                       const syndata::ImageSource& source, const TrainConfig& config, std::size_t threads) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + 2 <= records.size(); start += config.batch_size) {
    const std::size_t end = std::min(records.size(), start + config.batch_size);
    const Batch batch = prepare_batch(model, records.subspan(start, end - start), source, threads);
    const Tensor loss = contrastive_loss(model.encode_images(batch.images), model.encode_tokens(batch.tokens),
                                         model.log_temperature(), config.max_logit_scale);
    total += loss.item();
    ++count;
  }
  if (count == 0) throw std::invalid_argument("validation_loss: need at least 2 pairs");
  return total / static_cast<double>(count);
}

TrainingLog train(ClipModel& model, autodiff::AdamState& state, std::span<const PairRecord* const> train_split,
                  std::span<const PairRecord* const> val, const syndata::ImageSource& source, const TrainConfig& config,
                  std::size_t threads, const StepCallback& on_step,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  TrainingLog log;
  std::size_t next_step = 1;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto steps = train_epoch(model, state, train_split, source, config, epoch, next_step, threads, on_step);
    for (const auto& s : steps) log.append(s);
    next_step += steps.size();

    EpochRecord er;
    er.epoch = epoch;
    er.step = next_step - 1;
    er.logit_scale = logit_scale(model.log_temperature().item(), config.max_logit_scale);
    if (!val.empty()) {
      if (val.size() >= 2) er.val_loss = validation_loss(model, val, source, config, threads);
      constexpr std::array<std::size_t, 2> ks{1, 5};
      const auto recall = validate_retrieval(model, val, source, ks, threads);
      er.i2t_r1 = recall.image_to_text.at(1);
      er.i2t_r5 = recall.image_to_text.at(5);
      er.t2i_r1 = recall.text_to_image.at(1);
      er.t2i_r5 = recall.text_to_image.at(5);
    }
    log.append(er);
    if (on_epoch) on_epoch(er);
  }
  return log;
}

}  // namespace synclip::training
