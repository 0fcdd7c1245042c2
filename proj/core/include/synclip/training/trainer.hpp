#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "synclip/autodiff/adam.hpp"
#include "synclip/encoders/text_encoder.hpp"
#include "synclip/syndata/corpus.hpp"
#include "synclip/training/model.hpp"
#include "synclip/training/training_log.hpp"

namespace synclip::training {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  double initial_log_temperature = std::log(1.0 / 0.07);
  double max_logit_scale = 100.0;
  // Subtract the training-split mean image before the image encoder.
  bool center_images = false;
  std::uint64_t seed = 20240501;

  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Failure inside a training step, prefixed with epoch and batch index.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Batch {
  autodiff::Tensor images;
  encoders::TokenBatch tokens;
};

Batch prepare_batch(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                    const syndata::ImageSource& source, std::size_t threads = 1);

/// Pixel-wise mean of the images of `records` ([3, S, S]), summed in record
/// order so the result does not depend on `threads`. Throws
/// std::invalid_argument when `records` is empty.
autodiff::Tensor mean_image(std::span<const syndata::PairRecord* const> records, const syndata::ImageSource& source,
                            std::size_t threads = 1);

/// Forward, backward and one Adam update. Returns the loss and the logit
/// scale used for this step (both before the update).
StepRecord train_step(ClipModel& model, autodiff::AdamState& state, const Batch& batch, const TrainConfig& config);

/// Visiting order of the training split in `epoch` (1-based): a Fisher-Yates
/// shuffle seeded from (config seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

using StepCallback = std::function<void(const StepRecord&)>;

/// One pass over `train` in epoch_order, dropping the final partial batch.
/// Step numbers continue from `first_step`. With threads > 1 the next batch
/// is rendered while the current step runs; results are identical.
std::vector<StepRecord> train_epoch(ClipModel& model, autodiff::AdamState& state,
                                    std::span<const syndata::PairRecord* const> train,
                                    const syndata::ImageSource& source, const TrainConfig& config, std::size_t epoch,
                                    std::size_t first_step, std::size_t threads = 1, const StepCallback& on_step = {});

/// Mean contrastive loss over consecutive batches of batch_size (a trailing
/// partial batch of at least 2 pairs counts as one more batch).
double validation_loss(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                       const syndata::ImageSource& source, const TrainConfig& config, std::size_t threads = 1);

/// config.epochs epochs; after each epoch logs validation loss and recall@1/5
/// on `val` (skipped when `val` is empty).
TrainingLog train(ClipModel& model, autodiff::AdamState& state, std::span<const syndata::PairRecord* const> train_split,
                  std::span<const syndata::PairRecord* const> val, const syndata::ImageSource& source,
                  const TrainConfig& config, std::size_t threads = 1, const StepCallback& on_step = {},
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace synclip::training
