#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "synclip/autodiff/tensor.hpp"
#include "synclip/syndata/corpus.hpp"
#include "synclip/training/model.hpp"

namespace synclip::training {

struct RecallMetrics {
  std::map<std::size_t, double> image_to_text;  // k -> recall@k
  std::map<std::size_t, double> text_to_image;
};

/// Recall@k from unit-norm embeddings of matched pairs ([N, d] each). The
/// true match of query i is ranked by the number of candidates scoring
/// higher, counting equal scores at lower indices as higher.
RecallMetrics recall_at_k(const autodiff::Tensor& image_emb, const autodiff::Tensor& text_emb,
                          std::span<const std::size_t> ks);

/// Embeds `records` in chunks of `chunk` without recording gradients.
struct PairEmbeddings {
  autodiff::Tensor images;
  autodiff::Tensor texts;
};
PairEmbeddings embed_pairs(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                           const syndata::ImageSource& source, std::size_t chunk = 64, std::size_t threads = 1);

/// Full similarity matrix over `records`. Throws std::invalid_argument when
/// `records` is empty.
RecallMetrics validate_retrieval(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                                 const syndata::ImageSource& source, std::span<const std::size_t> ks,
                                 std::size_t threads = 1);

}  // namespace synclip::training
