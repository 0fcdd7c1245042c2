#include "synclip/training/retrieval.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "synclip/autodiff/ops.hpp"

namespace synclip::training {

using autodiff::Tensor;

namespace {

// Rank of the diagonal entry in row i of an n x n row-major matrix read
// through `at(i, j)`.
template <typename At>
std::size_t rank_of_match(std::size_t i, std::size_t n, At&& at) {
  const double own = at(i, i);
  std::size_t rank = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double v = at(i, j);
    if (v > own || (v == own && j < i)) ++rank;
  }
  return rank;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.size() == 1) return parts.front().detached();
  return autodiff::ops::concat(parts, 0).detached();
}

}  // namespace

RecallMetrics recall_at_k(const Tensor& image_emb, const Tensor& text_emb, std::span<const std::size_t> ks) {
  if (image_emb.rank() != 2 || image_emb.shape() != text_emb.shape()) {
    throw autodiff::ShapeError("recall_at_k", image_emb.shape(), text_emb.shape(), "embeddings must both be [N, d]");
  }
  const Tensor sim = autodiff::ops::matmul(image_emb.detached(), autodiff::ops::transpose(text_emb.detached()));
  const std::size_t n = image_emb.dim(0);
  auto row = [&](std::size_t i, std::size_t j) { return sim[i * n + j]; };
  auto col = [&](std::size_t i, std::size_t j) { return sim[j * n + i]; };
  std::vector<std::size_t> i2t(n), t2i(n);
  for (std::size_t i = 0; i < n; ++i) {
    i2t[i] = rank_of_match(i, n, row);
    t2i[i] = rank_of_match(i, n, col);
  }
  RecallMetrics out;
  for (auto k : ks) {
    const auto hits_i = std::count_if(i2t.begin(), i2t.end(), [k](std::size_t r) { return r < k; });
    const auto hits_t = std::count_if(t2i.begin(), t2i.end(), [k](std::size_t r) { return r < k; });
    out.image_to_text[k] = static_cast<double>(hits_i) / static_cast<double>(n);
    out.text_to_image[k] = static_cast<double>(hits_t) / static_cast<double>(n);
  }
  return out;
}

PairEmbeddings embed_pairs(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                           const syndata::ImageSource& source, std::size_t chunk, std::size_t threads) {
  if (records.empty()) throw std::invalid_argument("embed_pairs: no records");
  std::vector<Tensor> images, texts;
  for (std::size_t start = 0; start < records.size(); start += chunk) {
    const std::size_t end = std::min(records.size(), start + chunk);
    std::vector<const syndata::PairRecord*> part(records.begin() + static_cast<std::ptrdiff_t>(start),
                                                 records.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::string> captions;
    for (const auto* r : part) captions.push_back(r->caption);
    images.push_back(model.encode_images(syndata::image_batch(source, part, threads)));
    texts.push_back(model.encode_texts(captions));
  }
  return {concat_rows(images), concat_rows(texts)};
}

RecallMetrics validate_retrieval(const ClipModel& model, std::span<const syndata::PairRecord* const> records,
                                 const syndata::ImageSource& source, std::span<const std::size_t> ks,
                                 std::size_t threads) {
  if (records.empty()) throw std::invalid_argument("validate_retrieval: empty split");
  const auto emb = embed_pairs(model, records, source, 64, threads);
  return recall_at_k(emb.images, emb.texts, ks);
}

}  // namespace synclip::training
