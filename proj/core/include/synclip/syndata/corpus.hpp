#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "synclip/autodiff/tensor.hpp"
#include "synclip/syndata/labels.hpp"
#include "synclip/syndata/recipe.hpp"

namespace synclip::syndata {

enum class Split { Train, Val, Test };

std::string_view split_name(Split split);
/// "train", "val" or "test"; throws FormatError otherwise.
Split parse_split(std::string_view name);

/// One corpus entry. The image is not stored: it is a pure function of
/// (seed, labels, image size) and is rendered on demand or read from
/// image_path for corpora loaded from disk.
struct PairRecord {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  Labels labels;
  std::string caption;
  Split split = Split::Train;
  std::string image_path;  // relative to the corpus directory
};

struct CorpusConfig {
  std::size_t n = 2500;
  std::uint64_t seed = 20240501;
  LabelPriors priors;
  std::size_t image_size = 64;

  void validate() const;
};

inline constexpr std::size_t kMinCorpusSize = 10;

/// Pair `id`: seed = derive_seed(global_seed, id); labels, recipe and caption
/// use substreams 0, 1 and 2 of that seed.
PairRecord generate_pair(std::uint64_t global_seed, std::size_t id, const LabelPriors& priors);

SceneRecipe pair_recipe(const PairRecord& record, std::size_t image_size);
/// Rendered and quantized to 8 bits, so it equals the image read back from
/// the PPM written for this pair.
autodiff::Tensor render_pair(const PairRecord& record, std::size_t image_size);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded Fisher-Yates shuffle of 0..n-1, then floor(0.8 n) / floor(0.1 n) /
/// remainder. Throws std::invalid_argument for n < 10.
SplitIndices split_corpus(std::size_t n, std::uint64_t seed);

/// All n pairs with split assigned and image_path set to images/NNNNNN.ppm.
/// The result does not depend on `threads` (0 = all cores).
std::vector<PairRecord> generate_corpus(const CorpusConfig& config, std::size_t threads = 1);

std::string image_file_name(std::size_t id);

/// Writes one PPM per record under `dir` (creating dir/images).
void write_corpus_images(const std::filesystem::path& dir, const std::vector<PairRecord>& records,
                         std::size_t image_size, std::size_t threads = 1);

/// Where pair images come from during training and evaluation.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual std::size_t image_size() const = 0;
  /// [3, S, S] image for `record`. Must be safe to call concurrently.
  virtual autodiff::Tensor image(const PairRecord& record) const = 0;
};

/// Renders from the record seed.
class ProceduralImages final : public ImageSource {
 public:
  explicit ProceduralImages(std::size_t image_size) : size_(image_size) {}
  std::size_t image_size() const override { return size_; }
  autodiff::Tensor image(const PairRecord& record) const override { return render_pair(record, size_); }

 private:
  std::size_t size_;
};

/// Reads record.image_path below `root`, resampled to S x S.
class PpmImages final : public ImageSource {
 public:
  PpmImages(std::filesystem::path root, std::size_t image_size) : root_(std::move(root)), size_(image_size) {}
  std::size_t image_size() const override { return size_; }
  autodiff::Tensor image(const PairRecord& record) const override;

 private:
  std::filesystem::path root_;
  std::size_t size_;
};

/// Stacks images of `records` into [B, 3, S, S].
autodiff::Tensor image_batch(const ImageSource& source, const std::vector<const PairRecord*>& records,
                             std::size_t threads = 1);

}  // namespace synclip::syndata
