#include "synclip/zeroshot/dataset.hpp"

#include "synclip/parallel.hpp"
#include "synclip/syndata/errors.hpp"
#include "synclip/syndata/manifest.hpp"

namespace synclip::zeroshot {

std::vector<EvalSample> samples_from_records(std::span<const syndata::PairRecord* const> records,
                                             const syndata::ImageSource& source, std::size_t threads) {
  std::vector<EvalSample> samples(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    samples[i] = {records[i]->id, source.image(*records[i]), records[i]->labels};
  });
  return samples;
}

std::vector<EvalSample> load_external_dataset(const std::filesystem::path& path, std::size_t image_size,
                                              std::size_t threads) {
  const bool is_dir = std::filesystem::is_directory(path);
  const auto manifest_path = is_dir ? path / "manifest.jsonl" : path;
  const auto root = manifest_path.parent_path();
  const auto manifest = syndata::read_manifest(manifest_path);
  for (const auto& r : manifest.records) {
    if (!std::filesystem::exists(root / r.image_path)) {
      throw syndata::IoError("missing image file " + (root / r.image_path).string());
    }
  }
  std::vector<const syndata::PairRecord*> refs;
  for (const auto& r : manifest.records) refs.push_back(&r);
  const syndata::PpmImages source(root, image_size);
  return samples_from_records(refs, source, threads);
}

}  // namespace synclip::zeroshot
