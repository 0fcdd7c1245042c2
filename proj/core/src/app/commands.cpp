#include "synclip/app/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include "synclip/syndata/caption.hpp"
#include "synclip/syndata/errors.hpp"
#include "synclip/syndata/manifest.hpp"
#include "synclip/training/checkpoint.hpp"
#include "synclip/training/trainer.hpp"
#include "synclip/zeroshot/classify.hpp"
#include "synclip/zeroshot/dataset.hpp"
#include "synclip/zeroshot/report.hpp"

namespace synclip::app {

namespace fs = std::filesystem;
using syndata::PairRecord;
using training::format_double;

namespace {

using Header = std::vector<std::pair<std::string, std::string>>;

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write " + path.string());
  out << text;
  if (!out) throw UserError("failed writing " + path.string());
}

syndata::Manifest load_corpus(const fs::path& path) {
  if (!fs::exists(path)) {
    throw UserError("corpus manifest not found: " + path.string() + " (run gen-data first)");
  }
  return syndata::read_manifest(path);
}

std::vector<const PairRecord*> records_in(const syndata::Manifest& manifest, std::string_view split) {
  std::vector<const PairRecord*> out;
  for (const auto& r : manifest.records) {
    if (split == "all" || syndata::split_name(r.split) == split) out.push_back(&r);
  }
  return out;
}

std::unique_ptr<syndata::ImageSource> corpus_source(const RunConfig& config, std::size_t image_size) {
  if (config.image_source == "files") return std::make_unique<syndata::PpmImages>(config.corpus_dir, image_size);
  return std::make_unique<syndata::ProceduralImages>(image_size);
}

fs::path dataset_manifest(const fs::path& dataset) {
  return fs::is_directory(dataset) ? dataset / "manifest.jsonl" : dataset;
}

training::LoadedCheckpoint open_checkpoint(const std::string& path) {
  if (!fs::exists(path)) throw UserError("checkpoint not found: " + path + " (run train first)");
  return training::load_checkpoint(path);
}

std::string comment_block(const Header& header) {
  std::string out;
  for (const auto& [k, v] : header) out += "# " + k + " = " + v + "\n";
  return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const UserError*>(&e) ||
      dynamic_cast<const training::CheckpointError*>(&e) || dynamic_cast<const syndata::FormatError*>(&e) ||
      dynamic_cast<const syndata::IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e) ||
      dynamic_cast<const training::TrainingError*>(&e)) {
    return kExitUser;
  }
  return kExitInternal;
}

fs::path manifest_path(const RunConfig& config) { return fs::path(config.corpus_dir) / "manifest.jsonl"; }

void cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const auto records = syndata::generate_corpus(config.corpus, config.threads);
  syndata::write_corpus_images(config.corpus_dir, records, config.corpus.image_size, config.threads);

  auto prov = provenance(config);
  syndata::ManifestHeader header{prov[0].second, config.seed, {prov.begin() + 2, prov.end()}};
  syndata::write_manifest(manifest_path(config), {header, records});

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : records) ++counts[static_cast<int>(r.split)];
  out << "wrote " << records.size() << " pairs to " << config.corpus_dir << " (train " << counts[0] << ", val "
      << counts[1] << ", test " << counts[2] << ")\n";
  for (std::size_t f = 0; f < syndata::kNumFindings; ++f) {
    const auto finding = static_cast<syndata::Finding>(f);
    const auto n = std::count_if(records.begin(), records.end(), [&](const PairRecord& r) { return r.labels.has(finding); });
    out << "  " << syndata::finding_name(finding) << ": " << n << "\n";
  }
}

void cmd_train(const RunConfig& config, bool init_only, std::ostream& out) {
  const auto manifest = load_corpus(manifest_path(config));
  const auto train_split = records_in(manifest, "train");
  const auto val_split = records_in(manifest, "val");

  auto vocab = syndata::caption_vocabulary();
  training::ModelConfig model_config = config.model;
  model_config.text.vocab_size = vocab.size();
  auto model = training::ClipModel::initialize(model_config, std::move(vocab), config.train.initial_log_temperature,
                                               config.seed);
  if (train_split.empty()) throw UserError("corpus has no train split");
  const auto source = corpus_source(config, model_config.image.input_size);
  if (config.train.center_images) model.set_image_mean(training::mean_image(train_split, *source, config.threads));

  training::CheckpointMeta meta;
  meta.train = config.train;
  meta.provenance = provenance(config);

  if (!init_only) {
    if (train_split.size() < config.train.batch_size) {
      throw UserError("train split has " + std::to_string(train_split.size()) + " pairs, fewer than batch_size " +
                      std::to_string(config.train.batch_size));
    }
    autodiff::AdamState state({config.train.learning_rate});
    out << "training on " << train_split.size() << " pairs, " << config.train.epochs << " epochs of "
        << train_split.size() / config.train.batch_size << " steps\n";
    const auto log = training::train(model, state, train_split, val_split, *source, config.train, config.threads, {},
                                     [&](const training::EpochRecord& e) {
                                       out << "epoch " << e.epoch << " step " << e.step << " logit_scale "
                                           << format_double(e.logit_scale);
                                       if (e.val_loss) out << " val_loss " << format_double(*e.val_loss);
                                       out << " i2t@1 " << format_double(e.i2t_r1) << " t2i@1 "
                                           << format_double(e.t2i_r1) << "\n";
                                     });
    meta.epoch = config.train.epochs;
    if (!log.steps().empty()) {
      meta.metrics["first_train_loss"] = log.steps().front().loss;
      meta.metrics["final_train_loss"] = log.steps().back().loss;
    }
    if (!log.epochs().empty()) {
      const auto& last = log.epochs().back();
      if (last.val_loss) meta.metrics["val_loss"] = *last.val_loss;
      meta.metrics["val_i2t_r1"] = last.i2t_r1;
      meta.metrics["val_i2t_r5"] = last.i2t_r5;
      meta.metrics["val_t2i_r1"] = last.t2i_r1;
      meta.metrics["val_t2i_r5"] = last.t2i_r5;
    }
    ensure_parent(config.train_log);
    log.write_csv(config.train_log, meta.provenance);
    if (!log.steps().empty()) out << "final_loss = " << format_double(log.steps().back().loss) << "\n";
  }

  ensure_parent(config.checkpoint);
  training::save_checkpoint(config.checkpoint, model, meta);
  out << "saved checkpoint " << config.checkpoint << " (epoch " << meta.epoch << ", "
      << model.parameters().element_count() << " parameters)\n";
}

void cmd_eval(const RunConfig& config, const EvalInput& input, std::ostream& out) {
  const auto ckpt = open_checkpoint(input.checkpoint.empty() ? config.checkpoint : input.checkpoint);
  const auto& model = ckpt.model;
  const std::size_t size = model.config().image.input_size;

  std::vector<zeroshot::EvalSample> samples;
  std::string source_name;
  if (!input.dataset.empty()) {
    samples = zeroshot::load_external_dataset(input.dataset, size, config.threads);
    source_name = "external";
  } else {
    const auto manifest = load_corpus(manifest_path(config));
    const auto refs = records_in(manifest, config.eval_split);
    const auto source = corpus_source(config, size);
    samples = zeroshot::samples_from_records(refs, *source, config.threads);
    source_name = "corpus:" + config.eval_split;
  }
  if (samples.empty()) throw UserError("no evaluation samples in " + source_name);

  zeroshot::ModelReport report{"synclip-e" + std::to_string(ckpt.meta.epoch), {}};
  for (const auto& name : config.eval_tasks) {
    report.tasks.push_back(zeroshot::evaluate_task(model, zeroshot::find_task(name), samples,
                                                   {config.eval_balance, 64}));
  }

  Header header = provenance(config);
  for (const auto& [k, v] : ckpt.meta.provenance) {
    if (k == "config_hash") header.emplace_back("checkpoint_config_hash", v);
  }
  header.emplace_back("checkpoint_epoch", std::to_string(ckpt.meta.epoch));
  header.emplace_back("eval_source", source_name);

  const std::vector<zeroshot::ModelReport> reports{report};
  const fs::path dir = config.report_dir;
  const auto text = zeroshot::render_report(reports, "text", header);
  write_text(dir / "report.csv", zeroshot::render_report(reports, "csv", header));
  write_text(dir / "report.txt", text);
  write_text(dir / "details.txt", comment_block(header) + zeroshot::render_task_details(report));
  out << text;
}

void cmd_embed(const RunConfig& config, const EmbedInput& input, std::ostream& out) {
  if (input.modality != "image" && input.modality != "text") {
    throw UserError("--modality must be image or text, got '" + input.modality + "'");
  }
  const auto ckpt = open_checkpoint(input.checkpoint.empty() ? config.checkpoint : input.checkpoint);
  const auto& model = ckpt.model;
  const std::size_t size = model.config().image.input_size;

  syndata::Manifest manifest;
  std::unique_ptr<syndata::ImageSource> source;
  if (input.dataset.empty()) {
    manifest = load_corpus(manifest_path(config));
    source = corpus_source(config, size);
  } else {
    const auto path = dataset_manifest(input.dataset);
    manifest = load_corpus(path);
    source = std::make_unique<syndata::PpmImages>(path.parent_path(), size);
  }

  const fs::path out_path = input.out.empty() ? fs::path(config.report_dir) / "embeddings.csv" : fs::path(input.out);
  const std::size_t d = model.config().image.embed_dim;
  Header header = provenance(config);
  header.emplace_back("modality", input.modality);
  std::string csv = comment_block(header) + "id";
  for (std::size_t j = 0; j < d; ++j) csv += ",e" + std::to_string(j);
  csv += "\n";

  constexpr std::size_t kChunk = 64;
  const auto& records = manifest.records;
  for (std::size_t begin = 0; begin < records.size(); begin += kChunk) {
    const std::size_t end = std::min(records.size(), begin + kChunk);
    autodiff::Tensor emb;
    if (input.modality == "image") {
      std::vector<const PairRecord*> refs;
      for (std::size_t i = begin; i < end; ++i) refs.push_back(&records[i]);
      emb = model.encode_images(syndata::image_batch(*source, refs, config.threads));
    } else {
      std::vector<std::string> captions;
      for (std::size_t i = begin; i < end; ++i) captions.push_back(records[i].caption);
      emb = model.encode_texts(captions);
    }
    for (std::size_t i = begin; i < end; ++i) {
      csv += std::to_string(records[i].id);
      for (std::size_t j = 0; j < d; ++j) csv += "," + format_double(emb[(i - begin) * d + j]);
      csv += "\n";
    }
  }
  write_text(out_path, csv);
  out << "wrote " << records.size() << " " << input.modality << " embeddings (d=" << d << ") to "
      << out_path.string() << "\n";
}

namespace {

struct FlagBinding {
  std::string key;
  CLI::Option* option;
  std::string value;
};

class CommandLine {
 public:
  CommandLine() : app_("Synthetic fundus image-caption corpus, contrastive training and zero-shot evaluation", "synclip") {
    app_.require_subcommand(1);
    app_.set_version_flag("--version", "synclip 0.1.0");

    auto* gen = add_command("gen-data", "generate the synthetic corpus (manifest.jsonl + PPM images)");
    bind(gen, "--n", "corpus.n", "number of pairs");
    bind(gen, "--out", "paths.corpus_dir", "corpus output directory");

    auto* train = add_command("train", "train the dual encoder on the corpus train split");
    bind(train, "--corpus", "paths.corpus_dir", "corpus directory");
    bind(train, "--checkpoint", "paths.checkpoint", "checkpoint output path");
    bind(train, "--log", "paths.train_log", "training log CSV path");
    bind(train, "--epochs", "train.epochs", "training epochs");
    train->add_flag("--init-only", init_only_, "save the randomly initialized model without training")
        ->default_str("false");

    auto* eval = add_command("eval", "zero-shot evaluation and report rendering");
    bind(eval, "--corpus", "paths.corpus_dir", "corpus directory");
    bind(eval, "--checkpoint", "paths.checkpoint", "checkpoint to evaluate");
    bind(eval, "--tasks", "eval.tasks", "comma-separated tasks");
    bind(eval, "--split", "eval.split", "corpus split to evaluate");
    bind(eval, "--out", "paths.report_dir", "report directory");
    eval->add_option("--input", eval_input_.dataset, "external manifest file or directory instead of the corpus")
        ->default_str("<corpus split>");

    auto* embed = add_command("embed", "export embeddings of a manifest as CSV");
    bind(embed, "--corpus", "paths.corpus_dir", "corpus directory");
    bind(embed, "--checkpoint", "paths.checkpoint", "checkpoint to use");
    embed->add_option("--input", embed_input_.dataset, "manifest file or directory")->default_str("<corpus>");
    embed->add_option("--out", embed_input_.out, "output CSV")->default_str("<report_dir>/embeddings.csv");
    embed->add_option("--modality", embed_input_.modality, "image or text")->capture_default_str();
  }

  int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
      app_.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app_.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUser;
    }
    try {
      const RunConfig config = build_config();
      const auto* sub = app_.get_subcommands().front();
      const std::string name = sub->get_name();
      if (name == "gen-data") {
        cmd_gen_data(config, out);
      } else if (name == "train") {
        cmd_train(config, init_only_, out);
      } else if (name == "eval") {
        cmd_eval(config, {config.checkpoint, eval_input_.dataset}, out);
      } else {
        embed_input_.checkpoint = config.checkpoint;
        cmd_embed(config, embed_input_, out);
      }
      return kExitOk;
    } catch (const std::exception& e) {
      const int code = exit_code_for(e);
      err << (code == kExitUser ? "error: " : "internal error: ") << e.what() << "\n";
      return code;
    }
  }

 private:
  CLI::App* add_command(const std::string& name, const std::string& description) {
    auto* sub = app_.add_subcommand(name, description);
    sub->add_option("--config", config_file_, "config file (key = value lines)")->default_str("none");
    sub->add_option("--set", overrides_, "override a config key, KEY=VALUE (repeatable)")->take_all()->default_str("none");
    bind(sub, "--threads", "threads", "worker threads (0 = all cores)");
    bind(sub, "--seed", "seed", "global seed");
    return sub;
  }

  void bind(CLI::App* sub, const std::string& flag, const std::string& key, const std::string& description) {
    bindings_.push_back(std::make_unique<FlagBinding>(FlagBinding{key, nullptr, {}}));
    auto& b = *bindings_.back();
    b.option = sub->add_option(flag, b.value, description)->default_str(get_config_value(RunConfig{}, key));
  }

  RunConfig build_config() const {
    RunConfig config = config_file_.empty() ? RunConfig{} : load_run_config(config_file_);
    for (const auto& kv : overrides_) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& b : bindings_) {
      if (b->option->count() > 0) set_config_value(config, b->key, b->value);
    }
    config.finalize();
    return config;
  }

  CLI::App app_;
  std::string config_file_;
  std::vector<std::string> overrides_;
  std::vector<std::unique_ptr<FlagBinding>> bindings_;
  bool init_only_ = false;
  EvalInput eval_input_;
  EmbedInput embed_input_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommandLine cli;
  return cli.run(args, out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace synclip::app
