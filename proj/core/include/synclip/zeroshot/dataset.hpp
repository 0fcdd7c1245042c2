#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "synclip/syndata/corpus.hpp"
#include "synclip/zeroshot/classify.hpp"

namespace synclip::zeroshot {

/// Images of `records` from `source`, paired with their labels.
std::vector<EvalSample> samples_from_records(std::span<const syndata::PairRecord* const> records,
                                             const syndata::ImageSource& source, std::size_t threads = 1);

/// Loads every record of a manifest.jsonl (the corpus directory or the file
/// itself) with its PPM resampled to image_size x image_size by nearest
/// neighbor. Malformed records throw syndata::FormatError with the line
/// number; missing images throw syndata::IoError with the path.
std::vector<EvalSample> load_external_dataset(const std::filesystem::path& path, std::size_t image_size,
                                              std::size_t threads = 1);

}  // namespace synclip::zeroshot
