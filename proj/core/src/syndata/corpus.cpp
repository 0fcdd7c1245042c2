#include "synclip/syndata/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <system_error>

#include "synclip/autodiff/rng.hpp"
#include "synclip/parallel.hpp"
#include "synclip/syndata/caption.hpp"
#include "synclip/syndata/errors.hpp"
#include "synclip/syndata/ppm.hpp"
#include "synclip/syndata/render.hpp"

namespace synclip::syndata {

using autodiff::Rng;
using autodiff::Tensor;

namespace {
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;  // "split"
constexpr std::uint64_t kLabelStream = 0;
constexpr std::uint64_t kRecipeStream = 1;
constexpr std::uint64_t kCaptionStream = 2;
}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

void CorpusConfig::validate() const {
  if (n < kMinCorpusSize) {
    throw std::invalid_argument("corpus size " + std::to_string(n) + " is below the minimum of " +
                                std::to_string(kMinCorpusSize));
  }
  if (image_size < 16) throw std::invalid_argument("image size must be at least 16");
  priors.validate();
}

PairRecord generate_pair(std::uint64_t global_seed, std::size_t id, const LabelPriors& priors) {
  PairRecord record;
  record.id = id;
  record.seed = autodiff::derive_seed(global_seed, id);
  const Rng root(record.seed);
  Rng label_rng = root.derive(kLabelStream);
  record.labels = sample_labels(label_rng, priors);
  Rng caption_rng = root.derive(kCaptionStream);
  record.caption = generate_caption(record.labels, caption_rng);
  record.image_path = image_file_name(id);
  return record;
}

SceneRecipe pair_recipe(const PairRecord& record, std::size_t image_size) {
  Rng rng = Rng(record.seed).derive(kRecipeStream);
  return make_recipe(record.labels, image_size, rng);
}

Tensor render_pair(const PairRecord& record, std::size_t image_size) {
  return quantize_8bit(render_image(pair_recipe(record, image_size)));
}

SplitIndices split_corpus(std::size_t n, std::uint64_t seed) {
  if (n < kMinCorpusSize) {
    throw std::invalid_argument("split_corpus: need at least " + std::to_string(kMinCorpusSize) + " pairs, got " +
                                std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(autodiff::derive_seed(seed ^ kSplitStream, 0));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

std::vector<PairRecord> generate_corpus(const CorpusConfig& config, std::size_t threads) {
  config.validate();
  std::vector<PairRecord> records(config.n);
  parallel_for(config.n, threads, [&](std::size_t i) { records[i] = generate_pair(config.seed, i, config.priors); });
  const auto split = split_corpus(config.n, config.seed);
  for (auto i : split.val) records[i].split = Split::Val;
  for (auto i : split.test) records[i].split = Split::Test;
  return records;
}

std::string image_file_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%06zu.ppm", id);
  return buf;
}

void write_corpus_images(const std::filesystem::path& dir, const std::vector<PairRecord>& records,
                         std::size_t image_size, std::size_t threads) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    write_ppm(dir / records[i].image_path, render_pair(records[i], image_size));
  });
}

Tensor PpmImages::image(const PairRecord& record) const {
  if (record.image_path.empty()) throw FormatError("record " + std::to_string(record.id) + " has no image_path");
  return resize_nearest(read_ppm(root_ / record.image_path), size_);
}

Tensor image_batch(const ImageSource& source, const std::vector<const PairRecord*>& records, std::size_t threads) {
  const std::size_t s = source.image_size();
  const std::size_t per = 3 * s * s;
  std::vector<double> data(records.size() * per);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const Tensor img = source.image(*records[i]);
    if (img.shape() != autodiff::Shape{3, s, s}) {
      throw autodiff::ShapeError("image_batch", img.shape(), {3, s, s}, "image source returned wrong size");
    }
    std::copy(img.data().begin(), img.data().end(), data.begin() + static_cast<std::ptrdiff_t>(i * per));
  });
  return Tensor({records.size(), 3, s, s}, std::move(data));
}

}  // namespace synclip::syndata
