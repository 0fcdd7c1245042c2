#include "synclip/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace synclip::training {

using autodiff::Tensor;
using nlohmann::ordered_json;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedCheckpointError("checkpoint truncated while reading " + std::string(what) + ": need " +
                                     std::to_string(n) + " bytes at offset " + std::to_string(pos_) + ", have " +
                                     std::to_string(bytes_.size() - pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

ordered_json image_json(const encoders::ImageEncoderConfig& c) {
  ordered_json j;
  j["input_size"] = c.input_size;
  j["stem_channels"] = c.stem_channels;
  j["residual_blocks"] = c.num_residual_blocks;
  j["embed_dim"] = c.embed_dim;
  return j;
}

ordered_json text_json(const encoders::TextEncoderConfig& c) {
  ordered_json j;
  j["vocab_size"] = c.vocab_size;
  j["max_seq_len"] = c.max_seq_len;
  j["model_dim"] = c.model_dim;
  j["layers"] = c.num_layers;
  j["heads"] = c.num_heads;
  j["embed_dim"] = c.embed_dim;
  return j;
}

ordered_json train_json(const TrainConfig& c) {
  ordered_json j;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["log_temperature"] = c.initial_log_temperature;
  j["max_logit_scale"] = c.max_logit_scale;
  j["center_images"] = c.center_images;
  j["seed"] = c.seed;
  return j;
}

ordered_json header_json(const ClipModel& model, const CheckpointMeta& meta) {
  ordered_json h;
  h["model"]["image"] = image_json(model.config().image);
  h["model"]["text"] = text_json(model.config().text);
  h["vocabulary"] = model.vocabulary().tokens();
  h["epoch"] = meta.epoch;
  h["train"] = train_json(meta.train);
  ordered_json metrics = ordered_json::object();
  for (const auto& [k, v] : meta.metrics) metrics[k] = v;
  h["metrics"] = metrics;
  ordered_json provenance = ordered_json::object();
  for (const auto& [k, v] : meta.provenance) provenance[k] = v;
  h["provenance"] = provenance;
  return h;
}

std::size_t size_field(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw MalformedCheckpointError(std::string("checkpoint header field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double double_field(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw MalformedCheckpointError(std::string("checkpoint header field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::string serialize_checkpoint(const ClipModel& model, const CheckpointMeta& meta) {
  std::string out(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string header = header_json(model, meta).dump();
  put<std::uint64_t>(out, header.size());
  out += header;
  const auto& params = model.parameters();
  put<std::uint64_t>(out, params.size());
  for (const auto& [name, value] : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
    for (auto d : value.shape()) put<std::uint64_t>(out, d);
    const auto data = value.data();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  }
  const auto mean = model.image_mean().data();
  out.append(reinterpret_cast<const char*>(mean.data()), mean.size() * sizeof(double));
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ClipModel& model, const CheckpointMeta& meta) {
  const std::string bytes = serialize_checkpoint(model, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  const std::string magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw BadMagicError("not a checkpoint: bad magic '" + magic + "' (expected 'VCLP')");
  }
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw VersionMismatchError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                               std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = in.get<std::uint64_t>("header length");
  if (header_len > in.remaining()) in.take(header_len, "header");
  const std::string header_text = in.take(header_len, "header");

  ModelConfig config;
  CheckpointMeta meta;
  std::vector<std::string> tokens;
  try {
    const ordered_json h = ordered_json::parse(header_text);
    const auto& image = h.at("model").at("image");
    config.image.input_size = size_field(image, "input_size");
    config.image.stem_channels = size_field(image, "stem_channels");
    config.image.num_residual_blocks = size_field(image, "residual_blocks");
    config.image.embed_dim = size_field(image, "embed_dim");
    const auto& text = h.at("model").at("text");
    config.text.vocab_size = size_field(text, "vocab_size");
    config.text.max_seq_len = size_field(text, "max_seq_len");
    config.text.model_dim = size_field(text, "model_dim");
    config.text.num_layers = size_field(text, "layers");
    config.text.num_heads = size_field(text, "heads");
    config.text.embed_dim = size_field(text, "embed_dim");
    tokens = h.at("vocabulary").get<std::vector<std::string>>();
    meta.epoch = size_field(h, "epoch");
    const auto& train = h.at("train");
    meta.train.batch_size = size_field(train, "batch_size");
    meta.train.epochs = size_field(train, "epochs");
    meta.train.learning_rate = double_field(train, "learning_rate");
    meta.train.initial_log_temperature = double_field(train, "log_temperature");
    meta.train.max_logit_scale = double_field(train, "max_logit_scale");
    meta.train.center_images = train.at("center_images").get<bool>();
    meta.train.seed = train.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : h.at("metrics").items()) meta.metrics[k] = v.get<double>();
    for (const auto& [k, v] : h.at("provenance").items()) meta.provenance.emplace_back(k, v.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCheckpointError(std::string("checkpoint header is malformed: ") + e.what());
  }

  autodiff::ParameterSet params;
  const auto count = in.get<std::uint64_t>("parameter count");
  for (std::uint64_t p = 0; p < count; ++p) {
    const auto name_len = in.get<std::uint32_t>("parameter name length");
    const std::string name = in.take(name_len, "parameter name");
    const auto rank = in.get<std::uint32_t>("parameter rank");
    if (rank > 8) throw MalformedCheckpointError("parameter '" + name + "' has implausible rank " + std::to_string(rank));
    autodiff::Shape shape;
    std::uint64_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = in.get<std::uint64_t>("parameter shape");
      if (d == 0 || d > (std::uint64_t{1} << 32)) {
        throw MalformedCheckpointError("parameter '" + name + "' has invalid dimension " + std::to_string(d));
      }
      shape.push_back(d);
      numel *= d;
    }
    if (numel > in.remaining() / sizeof(double)) in.take(numel * sizeof(double), "parameter values");
    const std::string raw = in.take(numel * sizeof(double), "parameter values");
    std::vector<double> values(numel);
    std::memcpy(values.data(), raw.data(), raw.size());
    try {
      params.add(name, Tensor::parameter(std::move(shape), std::move(values)));
    } catch (const std::exception& e) {
      throw MalformedCheckpointError("parameter '" + name + "': " + e.what());
    }
  }
  const std::size_t side = config.image.input_size;
  if (side == 0 || side > 4096) throw MalformedCheckpointError("image input_size " + std::to_string(side) + " is implausible");
  const std::size_t mean_numel = 3 * side * side;
  const std::string raw_mean = in.take(mean_numel * sizeof(double), "image mean");
  std::vector<double> mean(mean_numel);
  std::memcpy(mean.data(), raw_mean.data(), raw_mean.size());
  if (!in.at_end()) throw MalformedCheckpointError(std::to_string(in.remaining()) + " unexpected trailing bytes");

  try {
    auto vocab = encoders::Vocabulary::from_tokens(std::move(tokens));
    return {ClipModel(config, std::move(vocab), std::move(params), Tensor({3, side, side}, std::move(mean))), meta};
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedCheckpointError(std::string("checkpoint content is inconsistent: ") + e.what());
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace synclip::training
