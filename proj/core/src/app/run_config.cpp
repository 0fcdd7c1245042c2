#include "synclip/app/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "synclip/syndata/caption.hpp"
#include "synclip/training/training_log.hpp"
#include "synclip/zeroshot/tasks.hpp"

namespace synclip::app {

namespace {

using syndata::Finding;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError(std::string(key) + ": expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(double v) { return training::format_double(v); }
std::string show(bool v) { return v ? "true" : "false"; }

struct KeyHandler {
  ConfigKeyInfo info;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename Field>
KeyHandler size_key(std::string key, std::string doc, Field field) {
  return {{key, std::move(doc), false},
          [field](const RunConfig& c) { return show(static_cast<std::uint64_t>(field(const_cast<RunConfig&>(c)))); },
          [field, key](RunConfig& c, std::string_view v) { field(c) = static_cast<std::size_t>(parse_uint(key, v)); }};
}

template <typename Field>
KeyHandler double_key(std::string key, std::string doc, Field field) {
  return {{key, std::move(doc), false},
          [field](const RunConfig& c) { return show(field(const_cast<RunConfig&>(c))); },
          [field, key](RunConfig& c, std::string_view v) { field(c) = parse_double(key, v); }};
}

template <typename Field>
KeyHandler path_key(std::string key, std::string doc, Field field) {
  return {{key, std::move(doc), true},
          [field](const RunConfig& c) { return field(const_cast<RunConfig&>(c)); },
          [field, key](RunConfig& c, std::string_view v) {
            if (v.empty()) throw ConfigError(key + ": path must not be empty");
            field(c) = std::string(v);
          }};
}

std::vector<KeyHandler> make_handlers() {
  std::vector<KeyHandler> h;
  h.push_back({{"seed", "global seed for data, initialization and shuffling", false},
               [](const RunConfig& c) { return show(c.seed); },
               [](RunConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); }});
  h.push_back(size_key("threads", "worker threads (0 = all cores); never changes results",
                       [](RunConfig& c) -> std::size_t& { return c.threads; }));
  h.push_back(path_key("paths.corpus_dir", "corpus directory (manifest.jsonl + images/)",
                       [](RunConfig& c) -> std::string& { return c.corpus_dir; }));
  h.push_back(path_key("paths.checkpoint", "checkpoint file", [](RunConfig& c) -> std::string& { return c.checkpoint; }));
  h.push_back(path_key("paths.train_log", "training log CSV", [](RunConfig& c) -> std::string& { return c.train_log; }));
  h.push_back(path_key("paths.report_dir", "directory for reports and exports",
                       [](RunConfig& c) -> std::string& { return c.report_dir; }));
  h.push_back(size_key("corpus.n", "number of generated pairs (>= 10)",
                       [](RunConfig& c) -> std::size_t& { return c.corpus.n; }));
  h.push_back(size_key("corpus.image_size", "image side in pixels",
                       [](RunConfig& c) -> std::size_t& { return c.corpus.image_size; }));
  h.push_back({{"corpus.image_source", "render (from pair seeds) or files (read the PPMs)", false},
               [](const RunConfig& c) { return c.image_source; },
               [](RunConfig& c, std::string_view v) {
                 if (v != "render" && v != "files") {
                   throw ConfigError("corpus.image_source: expected render or files, got '" + std::string(v) + "'");
                 }
                 c.image_source = std::string(v);
               }});
  for (std::size_t f = 0; f < syndata::kNumFindings; ++f) {
    const std::string name(syndata::finding_name(static_cast<Finding>(f)));
    h.push_back(double_key("prior." + name, "probability of " + name,
                           [f](RunConfig& c) -> double& { return c.corpus.priors.finding[f]; }));
  }
  h.push_back(double_key("readability.fair", "probability of a fair readability score per region",
                         [](RunConfig& c) -> double& { return c.corpus.priors.readability_fair; }));
  h.push_back(double_key("readability.poor", "probability of a poor readability score per region",
                         [](RunConfig& c) -> double& { return c.corpus.priors.readability_poor; }));
  h.push_back(size_key("image.stem_channels", "channels after the stem convolution",
                       [](RunConfig& c) -> std::size_t& { return c.model.image.stem_channels; }));
  h.push_back(size_key("image.residual_blocks", "residual blocks (channels double every 2)",
                       [](RunConfig& c) -> std::size_t& { return c.model.image.num_residual_blocks; }));
  h.push_back(size_key("embed_dim", "shared embedding dimension",
                       [](RunConfig& c) -> std::size_t& { return c.model.image.embed_dim; }));
  h.push_back(size_key("text.max_seq_len", "token positions including [BOS] and [EOS]",
                       [](RunConfig& c) -> std::size_t& { return c.model.text.max_seq_len; }));
  h.push_back(size_key("text.model_dim", "transformer width",
                       [](RunConfig& c) -> std::size_t& { return c.model.text.model_dim; }));
  h.push_back(size_key("text.layers", "transformer layers",
                       [](RunConfig& c) -> std::size_t& { return c.model.text.num_layers; }));
  h.push_back(size_key("text.heads", "attention heads", [](RunConfig& c) -> std::size_t& { return c.model.text.num_heads; }));
  h.push_back(size_key("train.batch_size", "pairs per step", [](RunConfig& c) -> std::size_t& { return c.train.batch_size; }));
  h.push_back(size_key("train.epochs", "passes over the train split",
                       [](RunConfig& c) -> std::size_t& { return c.train.epochs; }));
  h.push_back(double_key("train.learning_rate", "Adam step size",
                         [](RunConfig& c) -> double& { return c.train.learning_rate; }));
  h.push_back(double_key("train.log_temperature", "initial log of the logit scale",
                         [](RunConfig& c) -> double& { return c.train.initial_log_temperature; }));
  h.push_back(double_key("train.max_logit_scale", "upper clamp of the logit scale",
                         [](RunConfig& c) -> double& { return c.train.max_logit_scale; }));
  h.push_back({{"train.center_images", "subtract the training-split mean image before the image encoder", false},
               [](const RunConfig& c) { return show(c.train.center_images); },
               [](RunConfig& c, std::string_view v) { c.train.center_images = parse_bool("train.center_images", v); }});
  h.push_back({{"eval.tasks", "comma-separated zero-shot tasks", false},
               [](const RunConfig& c) {
                 std::string s;
                 for (const auto& t : c.eval_tasks) s += (s.empty() ? "" : ",") + t;
                 return s;
               },
               [](RunConfig& c, std::string_view v) {
                 c.eval_tasks.clear();
                 std::string item;
                 std::istringstream in{std::string(v)};
                 while (std::getline(in, item, ',')) {
                   item = trim(item);
                   if (item.empty()) continue;
                   zeroshot::find_task(item);
                   c.eval_tasks.push_back(item);
                 }
                 if (c.eval_tasks.empty()) throw ConfigError("eval.tasks: at least one task is required");
               }});
  h.push_back({{"eval.split", "split evaluated: train, val, test or all", false},
               [](const RunConfig& c) { return c.eval_split; },
               [](RunConfig& c, std::string_view v) {
                 if (v != "train" && v != "val" && v != "test" && v != "all") {
                   throw ConfigError("eval.split: expected train, val, test or all, got '" + std::string(v) + "'");
                 }
                 c.eval_split = std::string(v);
               }});
  h.push_back({{"eval.balance", "evaluate an equal number of samples per class", false},
               [](const RunConfig& c) { return show(c.eval_balance); },
               [](RunConfig& c, std::string_view v) { c.eval_balance = parse_bool("eval.balance", v); }});
  return h;
}

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> h = make_handlers();
  return h;
}

const KeyHandler& handler(std::string_view key) {
  for (const auto& h : handlers()) {
    if (h.info.key == key) return h;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::finalize() {
  corpus.seed = seed;
  train.seed = seed;
  model.image.input_size = corpus.image_size;
  model.text.embed_dim = model.image.embed_dim;
  try {
    corpus.validate();
    model.image.validate();
    train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (model.text.max_seq_len < syndata::kMaxCaptionWords + 2) {
    throw ConfigError("text.max_seq_len must be at least " + std::to_string(syndata::kMaxCaptionWords + 2) +
                      " to hold the longest caption");
  }
  if (model.text.model_dim == 0 || model.text.num_heads == 0 || model.text.model_dim % model.text.num_heads != 0) {
    throw ConfigError("text.model_dim must be a positive multiple of text.heads");
  }
}

const std::vector<ConfigKeyInfo>& config_keys() {
  static const std::vector<ConfigKeyInfo> keys = [] {
    std::vector<ConfigKeyInfo> out;
    for (const auto& h : handlers()) out.push_back(h.info);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  try {
    handler(key).set(config, trim(value));
  } catch (const zeroshot::UnknownTaskError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::string get_config_value(const RunConfig& config, std::string_view key) { return handler(key).get(config); }

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(content.substr(0, eq)), trim(content.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config, bool include_paths) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& h : handlers()) {
    if (h.info.is_path && !include_paths) continue;
    out.emplace_back(h.info.key, h.get(config));
  }
  return out;
}

std::string render_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& h : handlers()) out += "# " + h.info.description + "\n" + h.info.key + " = " + h.get(config) + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : config_entries(config, false)) {
    if (k == "threads") continue;
    for (char ch : k + "=" + v + "\n") {
      hash ^= static_cast<unsigned char>(ch);
      hash *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::vector<std::pair<std::string, std::string>> provenance(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out = {{"config_hash", config_hash(config)},
                                                          {"seed", std::to_string(config.seed)}};
  for (auto& kv : config_entries(config, false)) {
    if (kv.first != "seed" && kv.first != "threads") out.push_back(std::move(kv));
  }
  return out;
}

}  // namespace synclip::app
